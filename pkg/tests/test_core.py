import numpy as np
import pytest
from hypothesis import given, strategies as st

from ftpp import (
    ConfigError,
    Dataset,
    DurationScale,
    Event,
    EventSequence,
    MarkerSpace,
    ParamMatrix,
    param_counts,
    validate,
)


def test_space_dimensions(space_32_p2):
    assert space_32_p2.total_marker_dim() == 5
    assert space_32_p2.feature_dim() == 7
    assert space_32_p2.coupled_dim() == 6
    assert space_32_p2.row_offset(1) == 3
    assert space_32_p2.column_offset(0) == 2
    assert space_32_p2.column_offset(1) == 5


def test_space_rejects_degenerate_dims():
    with pytest.raises(ConfigError):
        MarkerSpace(cardinalities=())
    with pytest.raises(ConfigError):
        MarkerSpace(cardinalities=(3, 1))
    with pytest.raises(ConfigError):
        MarkerSpace(cardinalities=(3,), profile_dim=-1)


def test_duration_scale_checks():
    scale = DurationScale(((0.0, 1.0), (1.0, 3.0), (3.0, None)), (0.5, 1.5, 4.0))
    assert scale.classify(0.2) == 0
    assert scale.classify(1.0) == 1  # half-open boundary: 1.0 belongs to [1, 3)
    assert scale.classify(100.0) == 2
    with pytest.raises(ConfigError):
        DurationScale(((0.0, 1.0),), (0.5, 1.5))
    with pytest.raises(ConfigError):
        DurationScale(((0.0, 1.0), (1.0, 2.0)), (0.9, 0.5))
    with pytest.raises(ConfigError):
        DurationScale(((0.0, 1.0), (0.5, 2.0)), (0.2, 1.0))


def test_column_labels():
    space = MarkerSpace((2, 2), profile_dim=1, names=("company", "position"))
    assert space.column_labels() == [
        "profile[0]", "company=1", "company=2", "position=1", "position=2"
    ]


def _two_seq_dataset(space):
    seqs = (
        EventSequence("a", np.zeros(space.profile_dim),
                      (Event(1.0, (0, 0)), Event(2.0, (2, 1)))),
        EventSequence("b", np.zeros(space.profile_dim), (Event(0.5, (1, 1)),)),
    )
    return Dataset(space, seqs)


def test_validate_clean_dataset(space_32):
    assert validate(_two_seq_dataset(space_32)) == []


def test_validate_marker_out_of_range(space_32):
    ds = Dataset(space_32, (
        EventSequence("a", np.zeros(0), (Event(1.0, (0, -1)),)),
    ))
    problems = validate(ds)
    assert len(problems) == 1
    assert problems[0].rule == "marker-range"
    assert problems[0].sequence_id == "a"
    assert problems[0].event_index == 0


def test_validate_equal_timestamps(space_32):
    ds = Dataset(space_32, (
        EventSequence("a", np.zeros(0), (Event(3.0, (0, 0)), Event(3.0, (1, 0)))),
    ))
    problems = validate(ds)
    assert [p.rule for p in problems] == ["time-strictly-increasing"]


def test_validate_profile_and_duration_rules():
    scale = DurationScale(((0.0, 1.0), (1.0, None)), (0.5, 2.0))
    space = MarkerSpace((2, 2), profile_dim=2, durations=(None, scale))
    seq = EventSequence(
        "a", np.zeros(3),
        (Event(1.0, (0, 0), durations=(None, 5.0)),),
    )
    rules = {p.rule for p in validate(Dataset(space, (seq,)))}
    assert "profile-length" in rules
    assert "duration-interval" in rules  # class 0 covers [0,1) but raw is 5.0


def test_param_counts_linkedin_shape():
    counts = param_counts(MarkerSpace((57, 10, 4), profile_dim=0))
    assert counts.decoupled_state_dim == 71
    assert counts.coupled_state_dim == 2280
    assert counts.decoupled == 71 * 71
    assert counts.coupled == 2280 * 2280


def test_param_counts_icu_shape():
    counts = param_counts(MarkerSpace((8, 3), profile_dim=0))
    assert counts.decoupled_state_dim == 11
    assert counts.coupled_state_dim == 24


def test_param_counts_single_dim_collapse():
    counts = param_counts(MarkerSpace((2,), profile_dim=4))
    assert counts.decoupled == 2 * 6 == 12
    assert counts.coupled == counts.decoupled


def test_param_counts_overflow():
    with pytest.raises(OverflowError):
        param_counts(MarkerSpace((10**7, 10**7), profile_dim=0))


@given(
    cards=st.lists(st.integers(min_value=2, max_value=30), min_size=2, max_size=5),
    profile=st.integers(min_value=0, max_value=10),
)
def test_decoupled_state_never_larger_than_coupled(cards, profile):
    # Sum vs product of the cardinalities: equal only in the (2, 2) corner,
    # strictly smaller everywhere else.
    counts = param_counts(MarkerSpace(tuple(cards), profile_dim=profile))
    if sorted(cards) == [2, 2]:
        assert counts.decoupled_state_dim == counts.coupled_state_dim
    else:
        assert counts.decoupled_state_dim < counts.coupled_state_dim
        assert counts.decoupled < counts.coupled


def test_param_matrix_blocks(space_32_p2):
    theta = ParamMatrix.zeros(space_32_p2)
    assert theta.values.shape == (5, 7)
    theta.block(1)[:] = 1.0
    assert np.all(theta.values[3:5] == 1.0)
    assert np.all(theta.values[:3] == 0.0)
    with pytest.raises(ConfigError):
        ParamMatrix(np.zeros((4, 7)), space_32_p2)
