"""The discriminative log-loss, its gradient, and the sparse-group objective.

The loss sums, over every event of every sequence and every marker
dimension, the negative log-probability the model assigns to the observed
marker value given the state just before the event. It is a plain sum
(not a mean), so the regularization weight scales with dataset size.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Dataset, MarkerSpace, ParamMatrix
from .errors import ConfigError, DataFormatError, NumericError
from .features import Standardizer, build_features, log_softmax_rows
from .kernels import KernelSpec


@dataclass(frozen=True)
class RegularizationSpec:
    """Overall weight ``lam`` split by ``alpha`` into entrywise and column parts.

    The entrywise (l1) weight is ``alpha * lam``; the column-norm (group)
    weight is ``(1 - alpha) * lam``. Every column is penalized, profile
    columns included; there is no intercept to exempt.
    """

    lam: float = 0.0
    alpha: float = 0.5

    def __post_init__(self):
        if self.lam < 0:
            raise ConfigError("regularization weight must be non-negative")
        if not 0 < self.alpha < 1:
            raise ConfigError("alpha must lie strictly between 0 and 1")

    @property
    def lam1(self) -> float:
        return self.alpha * self.lam

    @property
    def lam2(self) -> float:
        return (1.0 - self.alpha) * self.lam


@dataclass(frozen=True)
class TrainingMatrix:
    """Materialized training rows: one per (sequence, event) pair.

    ``features[r]`` is the feature vector at the evaluation point preceding
    the target event; ``targets[r]`` its 0-based marker tuple; ``rows[r]``
    names the (sequence id, 1-based event index) behind row ``r``.
    """

    features: np.ndarray
    targets: np.ndarray
    space: MarkerSpace
    rows: tuple[tuple[str, int], ...]

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]


def build_training_matrix(
    dataset: Dataset,
    kernel: KernelSpec,
    standardizer: Standardizer | None = None,
    mode: str = "history",
) -> TrainingMatrix:
    """Assemble features and targets for every event, in declared order.

    The row for event ``i`` is evaluated at the previous event's timestamp
    (the sequence start for the first event) with that previous event
    included in the history; the targets are event ``i``'s own markers.
    """
    space = dataset.space
    feats: list[np.ndarray] = []
    targets: list[tuple[int, ...]] = []
    rows: list[tuple[str, int]] = []
    for seq in dataset.sequences:
        profile = standardizer.transform(seq.profile) if standardizer else None
        for i, ev in enumerate(seq.events):
            t_eval = seq.events[i - 1].t if i > 0 else seq.start
            try:
                fv = build_features(
                    seq, space, kernel, t_eval, history_end=i,
                    mode=mode, profile=profile,
                )
            except Exception as exc:
                raise DataFormatError(
                    f"sequence {seq.id!r} event {i + 1}: {exc}"
                ) from exc
            feats.append(fv.values)
            targets.append(ev.markers)
            rows.append((seq.id, i + 1))
    features = (
        np.array(feats) if feats else np.zeros((0, space.feature_dim()))
    )
    target_arr = (
        np.array(targets, dtype=np.int64)
        if targets
        else np.zeros((0, space.n_dims), dtype=np.int64)
    )
    return TrainingMatrix(features, target_arr, space, tuple(rows))


def _theta_values(theta) -> np.ndarray:
    return theta.values if isinstance(theta, ParamMatrix) else np.asarray(theta, dtype=float)


def _check_shapes(theta: np.ndarray, tm: TrainingMatrix) -> None:
    expected = (tm.space.total_marker_dim(), tm.space.feature_dim())
    if theta.shape != expected:
        raise ConfigError(f"theta shape {theta.shape} != expected {expected}")


def loss(theta, tm: TrainingMatrix) -> float:
    """Summed negative log-probability of the observed markers."""
    theta = _theta_values(theta)
    _check_shapes(theta, tm)
    if tm.n_rows == 0:
        return 0.0
    total = 0.0
    for z in range(tm.space.n_dims):
        lo = tm.space.row_offset(z)
        block = theta[lo : lo + tm.space.cardinalities[z]]
        logp = log_softmax_rows(tm.features @ block.T)
        picked = logp[np.arange(tm.n_rows), tm.targets[:, z]]
        if not np.all(np.isfinite(picked)):
            r = int(np.argmax(~np.isfinite(picked)))
            seq_id, idx = tm.rows[r]
            raise NumericError(
                f"non-finite loss at sequence {seq_id!r} event {idx} (dimension {z + 1})"
            )
        total -= picked.sum()
    return float(total)


def loss_gradient(theta, tm: TrainingMatrix) -> np.ndarray:
    """Exact gradient of :func:`loss`: per dimension, (softmax - onehot)^T F."""
    theta = _theta_values(theta)
    _check_shapes(theta, tm)
    grad = np.zeros_like(theta)
    if tm.n_rows == 0:
        return grad
    for z in range(tm.space.n_dims):
        lo = tm.space.row_offset(z)
        m_z = tm.space.cardinalities[z]
        block = theta[lo : lo + m_z]
        probs = np.exp(log_softmax_rows(tm.features @ block.T))
        if not np.all(np.isfinite(probs)):
            r = int(np.argmax(~np.isfinite(probs).all(axis=1)))
            seq_id, idx = tm.rows[r]
            raise NumericError(
                f"non-finite gradient at sequence {seq_id!r} event {idx} (dimension {z + 1})"
            )
        probs[np.arange(tm.n_rows), tm.targets[:, z]] -= 1.0
        grad[lo : lo + m_z] = probs.T @ tm.features
    return grad


def penalty(theta, reg: RegularizationSpec) -> float:
    """The sparse-group penalty: entrywise l1 plus column-wise l2 norms."""
    theta = _theta_values(theta)
    column_norms = np.linalg.norm(theta, axis=0)
    return float(reg.lam1 * np.abs(theta).sum() + reg.lam2 * column_norms.sum())


def regularized_objective(theta, tm: TrainingMatrix, reg: RegularizationSpec) -> float:
    """Loss plus penalty: the quantity both solvers minimize and trace."""
    return loss(theta, tm) + penalty(theta, reg)
