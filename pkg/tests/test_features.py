import math

import numpy as np
import pytest

from ftpp import (
    DomainError,
    Event,
    EventSequence,
    KernelSpec,
    MarkerSpace,
    NumericError,
    Standardizer,
    build_features,
    intensities,
    marker_probabilities,
)


def seq_of(events, profile=(), start=0.0, seq_id="s"):
    return EventSequence(seq_id, np.array(profile, dtype=float), tuple(events), start)


def test_empty_history_mpp_profile_only():
    space = MarkerSpace((3, 2), profile_dim=2)
    seq = seq_of([], profile=[1.0, 2.0])
    fv = build_features(seq, space, KernelSpec("mpp"), t=0.0, history_end=0)
    assert np.allclose(fv.values, [1, 2, 0, 0, 0, 0, 0])


def test_single_event_zero_lag_indicators():
    space = MarkerSpace((3, 2), profile_dim=0)
    seq = seq_of([Event(1.0, (1, 0))])  # markers (2,1) in 1-based terms
    fv = build_features(seq, space, KernelSpec("hp", w=1.0), t=1.0, history_end=1)
    assert np.allclose(fv.values, [0, 1, 0, 1, 0])


def test_decayed_sum_matches_formula_oracle():
    # two history events with the same marker value, lags 1 and 2 under mcp
    space = MarkerSpace((2,), profile_dim=0)
    seq = seq_of([Event(1.0, (0,)), Event(2.0, (0,))])
    fv = build_features(seq, space, KernelSpec("mcp", sigma=1.0), t=3.0, history_end=2)
    expected = math.exp(-1.0) + math.exp(-4.0)  # hand-evaluated kernel sum
    assert fv.values[0] == pytest.approx(expected, abs=1e-12)
    assert expected == pytest.approx(0.38620, abs=5e-6)


def test_mcp_baseline_uses_last_history_event():
    space = MarkerSpace((2,), profile_dim=1)
    seq = seq_of([Event(1.0, (0,)), Event(4.0, (1,))], profile=[2.0])
    fv = build_features(seq, space, KernelSpec("mcp"), t=6.0, history_end=2)
    assert fv.values[0] == pytest.approx(2.0 * (6.0 - 4.0))
    # empty history: last-event time falls back to the sequence start
    fv0 = build_features(seq, space, KernelSpec("mcp"), t=6.0, history_end=0)
    assert fv0.values[0] == pytest.approx(2.0 * 6.0)


def test_history_time_violation():
    space = MarkerSpace((2,), profile_dim=0)
    seq = seq_of([Event(5.0, (0,))])
    with pytest.raises(DomainError):
        build_features(seq, space, KernelSpec("hp"), t=4.0, history_end=1)


def test_current_mode_keeps_only_last_event():
    space = MarkerSpace((3, 2), profile_dim=1)
    seq = seq_of([Event(1.0, (0, 0)), Event(2.0, (2, 1))], profile=[3.0])
    fv = build_features(seq, space, KernelSpec("hp"), t=2.0, history_end=2,
                        mode="current")
    assert np.allclose(fv.values, [3.0, 0, 0, 1, 0, 1])


def test_additivity_over_disjoint_history(rng):
    space = MarkerSpace((3, 2), profile_dim=0)
    kernel = KernelSpec("hp", w=0.7)
    events = [
        Event(float(t), (int(rng.integers(3)), int(rng.integers(2))))
        for t in np.sort(rng.uniform(0, 5, size=6))
    ]
    seq = seq_of(events)
    t = 6.0
    full = build_features(seq, space, kernel, t, history_end=6).values
    # split the history: first 4 events vs last 2 (as a fresh sequence)
    head = build_features(seq, space, kernel, t, history_end=4).values
    tail_seq = seq_of(events[4:])
    tail = build_features(tail_seq, space, kernel, t, history_end=2).values
    assert np.allclose(full, head + tail, atol=1e-12)


def test_marker_block_bounds(rng):
    space = MarkerSpace((4,), profile_dim=0)
    events = [Event(float(i), (int(rng.integers(4)),)) for i in range(1, 9)]
    seq = seq_of(events)
    fv = build_features(seq, space, KernelSpec("mcp", sigma=2.0), t=8.0, history_end=8)
    counts = np.bincount([e.markers[0] for e in events], minlength=4)
    assert np.all(fv.values >= 0)
    assert np.all(fv.values <= counts + 1e-12)


def test_intensities_values_and_overflow():
    theta = np.zeros((4, 3))
    assert np.allclose(intensities(theta, np.ones(3)), np.ones(4))
    theta = np.zeros((2, 2))
    theta[1, 1] = 1.0
    out = intensities(theta, np.array([0.0, 1.0]))
    assert out[1] == pytest.approx(math.e, abs=1e-12)
    with pytest.raises(NumericError, match="row 0"):
        intensities(np.full((1, 1), 1000.0), np.array([10.0]))


def test_intensity_matches_double_loop_oracle(rng):
    theta = rng.standard_normal((3, 5))
    feat = rng.standard_normal(5)
    got = intensities(theta, feat)
    for k in range(3):
        acc = 0.0
        for j in range(5):
            acc += theta[k, j] * feat[j]
        assert got[k] == pytest.approx(math.exp(acc), rel=1e-12)


def test_marker_probabilities_basics():
    assert np.allclose(marker_probabilities(np.zeros((4, 2)), np.ones(2)), 0.25)
    theta = np.array([[math.log(3.0)], [0.0]])
    probs = marker_probabilities(theta, np.array([1.0]))
    assert np.allclose(probs, [0.75, 0.25], atol=1e-12)


def test_marker_probabilities_against_direct_oracle(rng):
    for _ in range(10):
        theta = rng.standard_normal((5, 4)) * 3
        feat = rng.standard_normal(4)
        got = marker_probabilities(theta, feat)
        raw = np.array([math.exp(np.dot(theta[k], feat)) for k in range(5)])
        want = raw / raw.sum()
        assert got.sum() == pytest.approx(1.0, abs=1e-12)
        assert np.allclose(got, want, atol=1e-12)


def test_softmax_shift_invariance(rng):
    theta = rng.standard_normal((4, 6))
    feat = rng.standard_normal(6)
    shift = rng.standard_normal(6)
    base = marker_probabilities(theta, feat)
    shifted = marker_probabilities(theta + shift[None, :], feat)
    assert np.allclose(base, shifted, atol=1e-10)


def test_standardizer_roundtrip(rng):
    seqs = [seq_of([], profile=rng.uniform(-3, 3, size=3), seq_id=f"s{i}")
            for i in range(20)]
    std = Standardizer.fit(seqs)
    transformed = np.array([std.transform(s.profile) for s in seqs])
    assert np.allclose(transformed.mean(axis=0), 0.0, atol=1e-12)
    assert np.allclose(transformed.std(axis=0), 1.0, atol=1e-12)
    # constant columns are centered but not scaled
    seqs_const = [seq_of([], profile=[5.0], seq_id=f"c{i}") for i in range(4)]
    std_const = Standardizer.fit(seqs_const)
    assert std_const.transform(np.array([5.0]))[0] == 0.0
