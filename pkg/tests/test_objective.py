import math

import numpy as np
import pytest

from ftpp import (
    ConfigError,
    Dataset,
    Event,
    EventSequence,
    KernelSpec,
    MarkerSpace,
    ParamMatrix,
    RegularizationSpec,
    build_training_matrix,
    loss,
    loss_gradient,
    regularized_objective,
)
from conftest import make_dataset


def brute_force_loss(theta, tm):
    """Explicit-normalization oracle: enumerate every marker value directly."""
    total = 0.0
    space = tm.space
    for r in range(tm.n_rows):
        f = tm.features[r]
        for z in range(space.n_dims):
            lo = space.row_offset(z)
            scores = [
                sum(theta[lo + k, j] * f[j] for j in range(len(f)))
                for k in range(space.cardinalities[z])
            ]
            weights = [math.exp(s) for s in scores]
            prob = weights[tm.targets[r, z]] / sum(weights)
            total -= math.log(prob)
    return total


def test_regularization_spec():
    reg = RegularizationSpec(2.0, 0.25)
    assert reg.lam1 == pytest.approx(0.5)
    assert reg.lam2 == pytest.approx(1.5)
    assert reg.lam1 + reg.lam2 == pytest.approx(reg.lam)
    with pytest.raises(ConfigError):
        RegularizationSpec(-1.0, 0.5)
    with pytest.raises(ConfigError):
        RegularizationSpec(1.0, 1.0)


def test_row_count_and_order(space_32):
    seqs = (
        EventSequence("a", np.zeros(0), tuple(
            Event(float(i + 1), (0, 0)) for i in range(3))),
        EventSequence("b", np.zeros(0), (Event(1.0, (1, 1)),)),
        EventSequence("c", np.zeros(0), (Event(1.0, (2, 0)), Event(2.0, (0, 1)))),
    )
    tm = build_training_matrix(Dataset(space_32, seqs), KernelSpec("mpp"))
    assert tm.n_rows == 6
    assert tm.rows == (("a", 1), ("a", 2), ("a", 3), ("b", 1), ("c", 1), ("c", 2))


def test_first_row_has_empty_history(space_32_p2, rng):
    seq = EventSequence("a", rng.standard_normal(2), (Event(2.0, (1, 0)),))
    tm = build_training_matrix(Dataset(space_32_p2, (seq,)), KernelSpec("mpp"))
    assert np.allclose(tm.features[0, 2:], 0.0)  # marker block empty
    assert tuple(tm.targets[0]) == (1, 0)


def test_training_rows_include_previous_event(space_32):
    seq = EventSequence("a", np.zeros(0),
                        (Event(1.0, (2, 1)), Event(3.0, (0, 0))))
    tm = build_training_matrix(Dataset(space_32, (seq,)), KernelSpec("hp", w=1.0))
    # row 2 is evaluated at t=1 with event 1 in the history at zero lag
    assert np.allclose(tm.features[1], [0, 0, 1, 0, 1])


def test_loss_at_zero(space_32, rng):
    ds = make_dataset(space_32, rng, n_sequences=2, n_events=3)
    tm = build_training_matrix(ds, KernelSpec("hp"))
    theta = ParamMatrix.zeros(space_32)
    expected = tm.n_rows * (math.log(3) + math.log(2))
    assert loss(theta, tm) == pytest.approx(expected, abs=1e-10)
    # single row: log 3 + log 2
    one = make_dataset(space_32, rng, n_sequences=1, n_events=1)
    tm1 = build_training_matrix(one, KernelSpec("hp"))
    assert loss(theta, tm1) == pytest.approx(1.79176, abs=5e-6)


def test_loss_matches_brute_force(space_32_p2, rng):
    ds = make_dataset(space_32_p2, rng, n_sequences=3, n_events=3)
    tm = build_training_matrix(ds, KernelSpec("hp", w=0.5))
    theta = rng.standard_normal((5, 7))
    assert loss(theta, tm) == pytest.approx(brute_force_loss(theta, tm), abs=1e-10)


def test_gradient_at_zero_single_row(space_32):
    seq = EventSequence("a", np.zeros(0), (Event(1.0, (0, 1)),))
    tm = build_training_matrix(Dataset(space_32, (seq,)), KernelSpec("mpp"))
    # inject a feature so the gradient is visible despite the empty history
    tm.features[0, 0] = 1.0
    grad = loss_gradient(np.zeros((5, 5)), tm)
    f = tm.features[0]
    np.testing.assert_allclose(grad[0], (1 / 3 - 1) * f, atol=1e-12)
    np.testing.assert_allclose(grad[1], (1 / 3) * f, atol=1e-12)
    np.testing.assert_allclose(grad[2], (1 / 3) * f, atol=1e-12)
    np.testing.assert_allclose(grad[3], (1 / 2) * f, atol=1e-12)
    np.testing.assert_allclose(grad[4], (1 / 2 - 1) * f, atol=1e-12)


def test_gradient_zero_by_symmetry(space_32):
    # every marker value appears equally often with identical features
    events_a = [Event(float(i + 1), (i % 3, i % 2)) for i in range(6)]
    seqs = (EventSequence("a", np.zeros(0), tuple(events_a)),)
    tm = build_training_matrix(Dataset(space_32, seqs), KernelSpec("mpp"))
    tm.features[:] = 1.0  # identical rows
    grad = loss_gradient(np.zeros((5, 5)), tm)
    np.testing.assert_allclose(grad, 0.0, atol=1e-12)


def finite_difference_gradient(theta, tm, step=1e-5):
    fd = np.zeros_like(theta)
    for i in range(theta.shape[0]):
        for j in range(theta.shape[1]):
            up = theta.copy()
            up[i, j] += step
            down = theta.copy()
            down[i, j] -= step
            fd[i, j] = (loss(up, tm) - loss(down, tm)) / (2 * step)
    return fd


@pytest.mark.parametrize("seed", range(5))
def test_gradient_matches_finite_differences(seed):
    rng = np.random.default_rng(seed)
    space = MarkerSpace((3, 4), profile_dim=2)
    ds = make_dataset(space, rng, n_sequences=3, n_events=3)
    tm = build_training_matrix(ds, KernelSpec("hp", w=1.0))
    theta = rng.standard_normal((7, 9))
    grad = loss_gradient(theta, tm)
    fd = finite_difference_gradient(theta, tm)
    rel = np.abs(grad - fd) / np.maximum(1.0, np.maximum(np.abs(grad), np.abs(fd)))
    assert rel.max() <= 1e-5


def test_loss_convexity(space_32, rng):
    ds = make_dataset(space_32, rng, n_sequences=4, n_events=3)
    tm = build_training_matrix(ds, KernelSpec("hp"))
    for _ in range(20):
        a = rng.standard_normal((5, 5))
        b = rng.standard_normal((5, 5))
        lam = rng.uniform()
        mix = loss(lam * a + (1 - lam) * b, tm)
        assert mix <= lam * loss(a, tm) + (1 - lam) * loss(b, tm) + 1e-9


def test_regularized_objective(space_32, rng):
    ds = make_dataset(space_32, rng, n_sequences=2, n_events=2)
    tm = build_training_matrix(ds, KernelSpec("hp"))
    theta = np.zeros((5, 5))
    reg = RegularizationSpec(1.0, 0.5)
    assert regularized_objective(theta, tm, reg) == pytest.approx(loss(theta, tm))
    # lambda = 0 keeps the loss exactly (alpha is irrelevant)
    theta = rng.standard_normal((5, 5))
    reg0 = RegularizationSpec(0.0, 0.5)
    assert regularized_objective(theta, tm, reg0) == loss(theta, tm)
    # one nonzero entry v with unit weights adds |v| twice
    theta = np.zeros((5, 5))
    theta[2, 3] = -1.75
    reg = RegularizationSpec(2.0, 0.5)  # lam1 = lam2 = 1
    assert regularized_objective(theta, tm, reg) == pytest.approx(
        loss(theta, tm) + 1.75 + 1.75
    )
