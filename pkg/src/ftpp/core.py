"""Domain types: marker spaces, event sequences, parameter matrices, datasets.

Marker values are 0-based everywhere inside the library; the 1-based
convention of the on-disk formats is translated at the IO boundary
(see ``ftpp.dataio``).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import ConfigError

# Largest parameter count we accept before declaring arithmetic overflow.
_COUNT_LIMIT = 2**63 - 1


@dataclass(frozen=True)
class DurationScale:
    """Discretization of a continuous duration into ordered classes.

    ``intervals`` are half-open ``[lo, hi)`` pairs; ``hi`` may be ``None``
    for the final unbounded class. ``midpoints`` hold one representative
    value per interval and are what duration predictions are mapped back
    to when computing squared errors.
    """

    intervals: tuple[tuple[float, float | None], ...]
    midpoints: tuple[float, ...]

    def __post_init__(self):
        if len(self.intervals) != len(self.midpoints):
            raise ConfigError("one midpoint per duration interval is required")
        if len(self.intervals) == 0:
            raise ConfigError("duration scale needs at least one interval")
        prev_hi = None
        for i, (lo, hi) in enumerate(self.intervals):
            if hi is not None and not lo < hi:
                raise ConfigError(f"interval {i} is empty: [{lo}, {hi})")
            if prev_hi is not None and lo < prev_hi:
                raise ConfigError(f"interval {i} overlaps its predecessor")
            if hi is None and i != len(self.intervals) - 1:
                raise ConfigError("only the last interval may be unbounded")
            prev_hi = hi if hi is not None else np.inf
        mids = self.midpoints
        if any(b <= a for a, b in zip(mids, mids[1:])):
            raise ConfigError("duration midpoints must be strictly increasing")
        for i, ((lo, hi), mid) in enumerate(zip(self.intervals, mids)):
            if mid < lo or (hi is not None and mid >= hi):
                raise ConfigError(f"midpoint {mid} outside interval {i}")

    def classify(self, value: float) -> int:
        """Return the 0-based class index whose interval contains ``value``."""
        for i, (lo, hi) in enumerate(self.intervals):
            if value >= lo and (hi is None or value < hi):
                return i
        raise ConfigError(f"duration {value} falls outside every interval")


@dataclass(frozen=True)
class MarkerSpace:
    """The factorial label space: Z marker dimensions plus profile features.

    ``cardinalities[z]`` is the number of values the z-th marker can take;
    ``profile_dim`` is the length of the per-sequence profile vector. A
    dimension may carry a :class:`DurationScale` when its classes encode
    discretized durations.
    """

    cardinalities: tuple[int, ...]
    profile_dim: int = 0
    names: tuple[str, ...] | None = None
    durations: tuple[DurationScale | None, ...] | None = None
    time_unit: str = ""

    def __post_init__(self):
        if len(self.cardinalities) < 1:
            raise ConfigError("at least one marker dimension is required")
        if any(m < 2 for m in self.cardinalities):
            raise ConfigError("every marker dimension needs cardinality >= 2")
        if self.profile_dim < 0:
            raise ConfigError("profile_dim must be non-negative")
        if self.names is not None and len(self.names) != self.n_dims:
            raise ConfigError("one name per marker dimension is required")
        if self.durations is not None:
            if len(self.durations) != self.n_dims:
                raise ConfigError("durations must align with marker dimensions")
            for z, scale in enumerate(self.durations):
                if scale is not None and len(scale.midpoints) != self.cardinalities[z]:
                    raise ConfigError(
                        f"dimension {z}: duration scale has "
                        f"{len(scale.midpoints)} classes, expected {self.cardinalities[z]}"
                    )

    @property
    def n_dims(self) -> int:
        return len(self.cardinalities)

    def total_marker_dim(self) -> int:
        return sum(self.cardinalities)

    def feature_dim(self) -> int:
        return self.profile_dim + self.total_marker_dim()

    def coupled_dim(self) -> int:
        return int(np.prod([1] + list(self.cardinalities), dtype=object))

    def dim_name(self, z: int) -> str:
        return self.names[z] if self.names else f"dim{z + 1}"

    def duration_scale(self, z: int) -> DurationScale | None:
        return self.durations[z] if self.durations else None

    def row_offset(self, z: int) -> int:
        """First parameter row belonging to dimension ``z``."""
        return sum(self.cardinalities[:z])

    def column_offset(self, y: int) -> int:
        """First feature/parameter column of dimension ``y``'s marker block."""
        return self.profile_dim + sum(self.cardinalities[:y])

    def column_labels(self) -> list[str]:
        """Human-readable label per feature column (1-based marker values)."""
        labels = [f"profile[{j}]" for j in range(self.profile_dim)]
        for y, m in enumerate(self.cardinalities):
            labels.extend(f"{self.dim_name(y)}={k + 1}" for k in range(m))
        return labels


@dataclass(frozen=True)
class Event:
    """One timestamped event carrying a full tuple of marker values.

    ``durations`` optionally stores the raw continuous value behind each
    duration-dimension class (``None`` for non-duration dimensions).
    """

    t: float
    markers: tuple[int, ...]
    durations: tuple[float | None, ...] | None = None


@dataclass(frozen=True, eq=False)
class EventSequence:
    """One taker: a static profile plus their time-ordered events."""

    id: str
    profile: np.ndarray
    events: tuple[Event, ...]
    start: float = 0.0

    def __post_init__(self):
        profile = np.asarray(self.profile, dtype=float)
        profile.setflags(write=False)
        object.__setattr__(self, "profile", profile)
        object.__setattr__(self, "events", tuple(self.events))

    def __eq__(self, other):
        if not isinstance(other, EventSequence):
            return NotImplemented
        return (
            self.id == other.id
            and self.start == other.start
            and self.events == other.events
            and np.array_equal(self.profile, other.profile)
        )


@dataclass(frozen=True)
class Dataset:
    """A marker space together with the sequences that live in it."""

    space: MarkerSpace
    sequences: tuple[EventSequence, ...]

    def __post_init__(self):
        object.__setattr__(self, "sequences", tuple(self.sequences))

    def n_events(self) -> int:
        return sum(len(s.events) for s in self.sequences)


@dataclass(frozen=True)
class ParamMatrix:
    """Stacked parameters: one row per marker value, one column per feature.

    Rows are grouped by dimension (dimension z owns rows
    ``[row_offset(z), row_offset(z) + M_z)``); columns follow the feature
    layout: profile columns first, then the marker-indicator columns of
    each dimension in order.
    """

    values: np.ndarray
    space: MarkerSpace

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        expected = (self.space.total_marker_dim(), self.space.feature_dim())
        if values.shape != expected:
            raise ConfigError(
                f"parameter matrix shape {values.shape} != expected {expected}"
            )
        object.__setattr__(self, "values", values)

    @classmethod
    def zeros(cls, space: MarkerSpace) -> "ParamMatrix":
        return cls(np.zeros((space.total_marker_dim(), space.feature_dim())), space)

    def block(self, z: int) -> np.ndarray:
        """The rows parameterizing dimension ``z`` (a view, not a copy)."""
        lo = self.space.row_offset(z)
        return self.values[lo : lo + self.space.cardinalities[z]]


@dataclass(frozen=True)
class Violation:
    """One broken invariant found by :func:`validate`."""

    sequence_id: str
    event_index: int | None
    rule: str
    message: str

    def __str__(self) -> str:
        where = self.sequence_id
        if self.event_index is not None:
            where += f"[event {self.event_index}]"
        return f"{where}: {self.rule}: {self.message}"


def validate(dataset: Dataset) -> list[Violation]:
    """Check every sequence against the marker-space invariants.

    Returns a list of violations (empty when the dataset is well formed);
    malformed data is reported, never raised.
    """
    space = dataset.space
    out: list[Violation] = []

    def bad(seq_id, idx, rule, msg):
        out.append(Violation(seq_id, idx, rule, msg))

    for seq in dataset.sequences:
        if seq.profile.shape != (space.profile_dim,):
            bad(seq.id, None, "profile-length",
                f"profile has length {seq.profile.shape}, expected {space.profile_dim}")
        elif not np.all(np.isfinite(seq.profile)):
            bad(seq.id, None, "profile-finite", "profile contains non-finite values")
        prev_t = None
        for i, ev in enumerate(seq.events):
            if not np.isfinite(ev.t):
                bad(seq.id, i, "time-finite", f"timestamp {ev.t} is not finite")
            if i == 0 and ev.t < seq.start:
                bad(seq.id, i, "time-before-start",
                    f"first event at t={ev.t} precedes declared start {seq.start}")
            if prev_t is not None and not ev.t > prev_t:
                bad(seq.id, i, "time-strictly-increasing",
                    f"t={ev.t} does not exceed previous t={prev_t}")
            prev_t = ev.t
            if len(ev.markers) != space.n_dims:
                bad(seq.id, i, "marker-arity",
                    f"{len(ev.markers)} markers, expected {space.n_dims}")
                continue
            for z, m in enumerate(ev.markers):
                if not 0 <= m < space.cardinalities[z]:
                    bad(seq.id, i, "marker-range",
                        f"dimension {space.dim_name(z)} value {m + 1} outside "
                        f"[1, {space.cardinalities[z]}]")
            if ev.durations is not None:
                if len(ev.durations) != space.n_dims:
                    bad(seq.id, i, "duration-arity",
                        f"{len(ev.durations)} duration entries, expected {space.n_dims}")
                    continue
                for z, raw in enumerate(ev.durations):
                    if raw is None:
                        continue
                    scale = space.duration_scale(z)
                    if scale is None:
                        bad(seq.id, i, "duration-undeclared",
                            f"raw duration given for non-duration dimension {space.dim_name(z)}")
                    elif 0 <= ev.markers[z] < space.cardinalities[z]:
                        lo, hi = scale.intervals[ev.markers[z]]
                        if raw < lo or (hi is not None and raw >= hi):
                            bad(seq.id, i, "duration-interval",
                                f"raw duration {raw} outside class interval [{lo}, {hi})")
    return out


class ParamCounts(NamedTuple):
    """Parameter and state-space sizes of the decoupled vs coupled model."""

    decoupled: int
    coupled: int
    decoupled_state_dim: int
    coupled_state_dim: int


def param_counts(space: MarkerSpace) -> ParamCounts:
    """Count parameters for the decoupled model and its coupled equivalent.

    The decoupled model keeps one row per marker value (state dimension
    sum of cardinalities); collapsing the tuple into a single marker
    multiplies the cardinalities instead.
    """
    m = space.profile_dim
    s = space.total_marker_dim()
    p = space.coupled_dim()
    decoupled = s * (m + s)
    coupled = p * (m + p)
    if coupled > _COUNT_LIMIT or decoupled > _COUNT_LIMIT:
        raise OverflowError(
            f"parameter count exceeds {_COUNT_LIMIT}; cardinalities too large"
        )
    return ParamCounts(int(decoupled), int(coupled), s, p)
