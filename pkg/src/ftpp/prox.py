"""Closed-form shrinkage operators for the sparse-group penalty.

``soft_threshold`` solves min ||x||_1 + (u/2)||x - r||^2 with threshold
1/u; ``group_soft_threshold`` solves the same with the Euclidean norm in
place of the l1 norm, zeroing the whole block when ``r`` falls inside the
threshold ball. Their composition (entrywise first, then column-wise) is
the exact proximal operator of the combined penalty.
"""

from __future__ import annotations

import numpy as np


def soft_threshold(r: np.ndarray, threshold: float) -> np.ndarray:
    """Componentwise shrink toward zero by ``threshold``."""
    r = np.asarray(r, dtype=float)
    return np.sign(r) * np.maximum(np.abs(r) - threshold, 0.0)


def group_soft_threshold(r: np.ndarray, threshold: float) -> np.ndarray:
    """Shrink the whole vector radially; zero when ||r|| <= threshold."""
    r = np.asarray(r, dtype=float)
    norm = np.linalg.norm(r)
    if norm <= threshold:
        return np.zeros_like(r)
    return r * (1.0 - threshold / norm)


def group_soft_threshold_columns(mat: np.ndarray, threshold: float) -> np.ndarray:
    """Apply :func:`group_soft_threshold` to every column of a matrix."""
    mat = np.asarray(mat, dtype=float)
    norms = np.linalg.norm(mat, axis=0)
    scale = np.zeros_like(norms)
    hit = norms > threshold
    scale[hit] = 1.0 - threshold / norms[hit]
    return mat * scale


def sparse_group_prox(
    theta: np.ndarray, l1_threshold: float, l2_threshold: float
) -> np.ndarray:
    """Exact prox of the combined penalty at the given (step-scaled) thresholds."""
    return group_soft_threshold_columns(
        soft_threshold(theta, l1_threshold), l2_threshold
    )
