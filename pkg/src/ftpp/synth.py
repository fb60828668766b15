"""Seeded synthetic data drawn from the model's own conditional.

The generator samples each event's markers from the softmax conditional
under a ground-truth parameter matrix, using the same evaluation
convention training uses, so fits can be checked against a known answer.
Event-time gaps default to unit-exponential draws; when a duration
dimension exists, the sampled class's midpoint (jittered within its
interval) becomes the realized gap so timestamps and duration markers stay
consistent.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import Dataset, Event, EventSequence, MarkerSpace, ParamMatrix
from .errors import ConfigError
from .features import build_features, marker_probabilities
from .kernels import KernelSpec


@dataclass(frozen=True)
class LengthSpec:
    """How many events each sequence gets: fixed, poisson, or geometric."""

    kind: str = "poisson"
    mean: float = 4.0
    minimum: int = 1

    def __post_init__(self):
        if self.kind not in ("fixed", "poisson", "geometric"):
            raise ConfigError(f"unknown length kind {self.kind!r}")
        if self.minimum < 1:
            raise ConfigError("sequences need at least one event")

    def sample(self, rng: np.random.Generator) -> int:
        if self.kind == "fixed":
            return max(int(self.mean), self.minimum)
        if self.kind == "poisson":
            return max(int(rng.poisson(self.mean)), self.minimum)
        return max(int(rng.geometric(1.0 / max(self.mean, 1.0))), self.minimum)


@dataclass(frozen=True)
class ThetaSpec:
    """Ground truth: explicit values, a sampled sparse matrix, or all zeros.

    For ``kind="sparse"`` a fraction of feature columns is chosen active
    and filled with entries of magnitude in [magnitude/2, magnitude] and
    random sign; everything else is exactly zero.
    """

    kind: str = "sparse"
    active_fraction: float = 0.2
    magnitude: float = 2.0
    values: np.ndarray | None = None

    def __post_init__(self):
        if self.kind not in ("sparse", "values", "zero"):
            raise ConfigError(f"unknown theta kind {self.kind!r}")
        if self.kind == "sparse" and not 0 < self.active_fraction <= 1:
            raise ConfigError("active_fraction must lie in (0, 1]")
        if self.kind == "values" and self.values is None:
            raise ConfigError("theta kind 'values' needs explicit values")

    def realize(
        self, space: MarkerSpace, rng: np.random.Generator
    ) -> tuple[np.ndarray, list[int]]:
        shape = (space.total_marker_dim(), space.feature_dim())
        if self.kind == "zero":
            return np.zeros(shape), []
        if self.kind == "values":
            theta = np.asarray(self.values, dtype=float)
            if theta.shape != shape:
                raise ConfigError(f"theta shape {theta.shape} != expected {shape}")
            active = np.flatnonzero(np.linalg.norm(theta, axis=0) > 0)
            return theta, [int(j) for j in active]
        n_cols = shape[1]
        n_active = max(1, int(np.ceil(self.active_fraction * n_cols)))
        active = np.sort(rng.choice(n_cols, size=n_active, replace=False))
        theta = np.zeros(shape)
        mags = rng.uniform(0.5 * self.magnitude, self.magnitude, (shape[0], n_active))
        signs = rng.choice([-1.0, 1.0], (shape[0], n_active))
        theta[:, active] = mags * signs
        return theta, [int(j) for j in active]


@dataclass(frozen=True)
class GapSpec:
    """Inter-event times when no duration dimension dictates them."""

    kind: str = "exponential"
    rate: float = 1.0

    def __post_init__(self):
        if self.kind != "exponential":
            raise ConfigError(f"unknown gap kind {self.kind!r}")
        if not self.rate > 0:
            raise ConfigError("gap rate must be positive")


@dataclass(frozen=True)
class GeneratorSpec:
    space: MarkerSpace
    kernel: KernelSpec
    n_sequences: int
    length: LengthSpec = LengthSpec()
    theta: ThetaSpec = ThetaSpec()
    gaps: GapSpec = GapSpec()
    seed: int = 0

    def __post_init__(self):
        if self.n_sequences < 1:
            raise ConfigError("n_sequences must be at least 1")


@dataclass(frozen=True)
class GroundTruth:
    """Sidecar written next to a synthetic dataset: the answer key."""

    theta: ParamMatrix
    active_columns: tuple[int, ...]
    seed: int
    column_labels: tuple[str, ...] = field(default_factory=tuple)


def _duration_dim(space: MarkerSpace) -> int | None:
    if space.durations is None:
        return None
    for z, scale in enumerate(space.durations):
        if scale is not None:
            return z
    return None


def _jittered_gap(scale, cls: int, rng: np.random.Generator) -> float:
    lo, hi = scale.intervals[cls]
    mid = scale.midpoints[cls]
    slack = mid - lo if hi is None else min(mid - lo, hi - mid)
    return mid + rng.uniform(-0.5, 0.5) * slack


def generate(spec: GeneratorSpec) -> tuple[Dataset, GroundTruth]:
    """Sample a dataset under the ground-truth parameters; fully seeded."""
    rng = np.random.default_rng(spec.seed)
    space = spec.space
    theta, active = spec.theta.realize(space, rng)
    dur_dim = _duration_dim(space)
    blocks = [
        theta[space.row_offset(z) : space.row_offset(z) + space.cardinalities[z]]
        for z in range(space.n_dims)
    ]

    sequences = []
    for s in range(spec.n_sequences):
        profile = rng.standard_normal(space.profile_dim)
        n_events = spec.length.sample(rng)
        seq = EventSequence(id=f"seq{s:05d}", profile=profile, events=(), start=0.0)
        events: list[Event] = []
        t_prev = seq.start
        for i in range(n_events):
            fv = build_features(
                EventSequence(seq.id, profile, tuple(events), seq.start),
                space, spec.kernel, t_prev, history_end=i,
            )
            markers = tuple(
                int(rng.choice(space.cardinalities[z], p=marker_probabilities(blocks[z], fv)))
                for z in range(space.n_dims)
            )
            if dur_dim is not None:
                gap = _jittered_gap(space.durations[dur_dim], markers[dur_dim], rng)
                durations = tuple(
                    gap if z == dur_dim else None for z in range(space.n_dims)
                )
            else:
                gap = rng.exponential(1.0 / spec.gaps.rate)
                durations = None
            t = t_prev + gap
            events.append(Event(t=t, markers=markers, durations=durations))
            t_prev = t
        sequences.append(
            EventSequence(id=seq.id, profile=profile, events=tuple(events), start=0.0)
        )

    dataset = Dataset(space, tuple(sequences))
    truth = GroundTruth(
        theta=ParamMatrix(theta, space),
        active_columns=tuple(active),
        seed=spec.seed,
        column_labels=tuple(space.column_labels()),
    )
    return dataset, truth
