import numpy as np
import pytest

from ftpp import Dataset, Event, EventSequence, MarkerSpace


@pytest.fixture
def space_32():
    """Two dimensions with cardinalities 3 and 2, no profile."""
    return MarkerSpace(cardinalities=(3, 2))


@pytest.fixture
def space_32_p2():
    """Two dimensions (3, 2) plus a 2-coordinate profile."""
    return MarkerSpace(cardinalities=(3, 2), profile_dim=2)


def make_sequence(space, rng, n_events, seq_id="s", gap=1.0):
    """Random well-formed sequence with fixed unit gaps by default."""
    events = []
    t = 0.0
    for _ in range(n_events):
        t += gap if np.isscalar(gap) else rng.exponential(gap[0])
        markers = tuple(int(rng.integers(m)) for m in space.cardinalities)
        events.append(Event(t=t, markers=markers))
    profile = rng.standard_normal(space.profile_dim)
    return EventSequence(id=seq_id, profile=profile, events=tuple(events))


def make_dataset(space, rng, n_sequences=5, n_events=4):
    seqs = tuple(
        make_sequence(space, rng, n_events, seq_id=f"s{i}")
        for i in range(n_sequences)
    )
    return Dataset(space, seqs)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
