"""History-dependent feature vectors and the per-dimension softmax head.

A feature vector at time ``t`` for a sequence has layout

    [ profile * baseline_modulation(t) | marker block dim 1 | ... | dim Z ]

where the marker-block entry for value ``k`` of dimension ``y`` accumulates
``decay(t, t_i)`` over every history event ``i`` with ``m_{i,y} = k``.
Training evaluates at the previous event's timestamp with that event
included in the history (``decay(t, t) = 1``), so the current state enters
the features at full weight and the upcoming event's own time is never
used.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import EventSequence, MarkerSpace
from .errors import ConfigError, DomainError, NumericError
from .kernels import KernelSpec, baseline_modulation, decay

FEATURE_MODES = ("history", "current")


@dataclass(frozen=True)
class Standardizer:
    """Per-coordinate z-scoring of profile vectors, fit on a training split."""

    mean: np.ndarray
    scale: np.ndarray

    @classmethod
    def identity(cls, dim: int) -> "Standardizer":
        return cls(np.zeros(dim), np.ones(dim))

    @classmethod
    def fit(cls, sequences) -> "Standardizer":
        profiles = np.array([seq.profile for seq in sequences], dtype=float)
        if profiles.size == 0:
            dim = profiles.shape[1] if profiles.ndim == 2 else 0
            return cls.identity(dim)
        mean = profiles.mean(axis=0)
        scale = profiles.std(axis=0)
        scale[scale == 0.0] = 1.0  # constant columns: center only
        return cls(mean, scale)

    def transform(self, profile: np.ndarray) -> np.ndarray:
        return (np.asarray(profile, dtype=float) - self.mean) / self.scale


@dataclass(frozen=True)
class FeatureVector:
    """The assembled feature values plus where/when they were built."""

    values: np.ndarray
    t: float
    sequence_id: str


def build_features(
    seq: EventSequence,
    space: MarkerSpace,
    kernel: KernelSpec,
    t: float,
    history_end: int,
    mode: str = "history",
    profile: np.ndarray | None = None,
) -> FeatureVector:
    """Build the feature vector at time ``t`` from the first ``history_end`` events.

    ``mode="history"`` accumulates decayed indicators over the whole
    history; ``mode="current"`` keeps only the most recent event's raw
    indicators with no time weighting (the plain current-state baseline).
    ``profile`` overrides ``seq.profile`` (used to inject standardized
    values without copying sequences).
    """
    if mode not in FEATURE_MODES:
        raise ConfigError(f"unknown feature mode {mode!r}; pick one of {FEATURE_MODES}")
    if not 0 <= history_end <= len(seq.events):
        raise ConfigError(
            f"history_end={history_end} outside [0, {len(seq.events)}]"
        )
    history = seq.events[:history_end]
    if history and history[-1].t > t:
        raise DomainError(
            f"evaluation time {t} precedes last history event at {history[-1].t}"
        )
    if profile is None:
        profile = seq.profile
    profile = np.asarray(profile, dtype=float)
    if profile.shape != (space.profile_dim,):
        raise ConfigError(
            f"profile has shape {profile.shape}, expected ({space.profile_dim},)"
        )

    values = np.zeros(space.feature_dim())
    t_last = history[-1].t if history else seq.start
    m = space.profile_dim

    if mode == "current":
        values[:m] = profile
        if history:
            last = history[-1]
            for y, k in enumerate(last.markers):
                values[space.column_offset(y) + k] = 1.0
        return FeatureVector(values, float(t), seq.id)

    values[:m] = profile * baseline_modulation(kernel, t, t_last)
    for ev in history:
        weight = decay(kernel, t, ev.t)
        for y, k in enumerate(ev.markers):
            values[space.column_offset(y) + k] += weight
    return FeatureVector(values, float(t), seq.id)


def _as_values(feat) -> np.ndarray:
    return feat.values if isinstance(feat, FeatureVector) else np.asarray(feat, dtype=float)


def intensities(theta_block: np.ndarray, feat) -> np.ndarray:
    """Per-value event intensities ``exp(theta_block @ f)``; all positive."""
    scores = np.asarray(theta_block, dtype=float) @ _as_values(feat)
    with np.errstate(over="ignore"):
        out = np.exp(scores)
    if not np.all(np.isfinite(out)):
        row = int(np.argmax(~np.isfinite(out)))
        raise NumericError(f"intensity overflow in row {row} (score {scores[row]})")
    return out


def marker_probabilities(theta_block: np.ndarray, feat) -> np.ndarray:
    """Softmax over one dimension's marker values, max-shifted for stability."""
    scores = np.asarray(theta_block, dtype=float) @ _as_values(feat)
    scores = scores - scores.max()
    e = np.exp(scores)
    return e / e.sum()


def log_softmax_rows(scores: np.ndarray) -> np.ndarray:
    """Row-wise log-softmax of a 2-D score matrix (shared by loss/eval code)."""
    shifted = scores - scores.max(axis=1, keepdims=True)
    return shifted - np.log(np.exp(shifted).sum(axis=1, keepdims=True))
