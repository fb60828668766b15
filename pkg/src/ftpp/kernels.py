"""Parametric temporal kernels of the classic point-process families.

Each family is described by a baseline modulation ``baseline_modulation``
(how the profile term scales with time) and a decay kernel ``decay``
(how strongly a past event at ``t_prev`` is felt at ``t``):

=========  ====================  ==========================
family     baseline modulation   decay
=========  ====================  ==========================
``mpp``    1                     1
``hp``     1                     exp(-w (t - t'))
``scp``    t                     1
``mcp``    t - t_last            exp(-(t - t')^2 / sigma^2)
=========  ====================  ==========================

The discriminative pipeline always applies the exponential link on top of
the linear score, so these two functions are the only family-specific
pieces the rest of the code needs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConfigError, DomainError

FORMS = ("mpp", "hp", "scp", "mcp")


@dataclass(frozen=True)
class KernelSpec:
    """Which kernel family to use and its hyperparameters.

    ``w`` (decay rate) only matters for ``hp``; ``sigma`` (bandwidth) only
    for ``mcp``. Both default to 1.0.
    """

    form: str
    w: float = 1.0
    sigma: float = 1.0

    def __post_init__(self):
        if self.form not in FORMS:
            raise ConfigError(f"unknown kernel form {self.form!r}; pick one of {FORMS}")
        if self.form == "hp" and not self.w > 0:
            raise ConfigError("hp kernel needs decay rate w > 0")
        if self.form == "mcp" and not self.sigma > 0:
            raise ConfigError("mcp kernel needs bandwidth sigma > 0")


def baseline_modulation(spec: KernelSpec, t: float, t_last: float) -> float:
    """Time factor multiplying the profile block of the feature vector.

    ``t_last`` is the time of the most recent event at or before ``t``
    (the sequence start when there is none); it only matters for ``mcp``.
    """
    if spec.form in ("mpp", "hp"):
        return 1.0
    if spec.form == "scp":
        return float(t)
    if t < t_last:
        raise DomainError(f"mcp baseline needs t >= t_last, got t={t} < t_last={t_last}")
    return float(t - t_last)


def decay(spec: KernelSpec, t: float, t_prev: float) -> float:
    """Influence of an event at ``t_prev`` on the state at ``t``; in (0, 1]."""
    if t < t_prev:
        raise DomainError(f"decay needs t >= t_prev, got t={t} < t_prev={t_prev}")
    if spec.form in ("mpp", "scp"):
        return 1.0
    lag = t - t_prev
    if spec.form == "hp":
        return math.exp(-spec.w * lag)
    return math.exp(-(lag * lag) / (spec.sigma * spec.sigma))


def median_gap(sequences) -> float:
    """Median inter-event gap across sequences; the ``--sigma auto`` bandwidth.

    Falls back to 1.0 when no sequence has two events.
    """
    gaps = [
        b.t - a.t
        for seq in sequences
        for a, b in zip(seq.events, seq.events[1:])
    ]
    if not gaps:
        return 1.0
    gaps.sort()
    n = len(gaps)
    mid = n // 2
    med = gaps[mid] if n % 2 else 0.5 * (gaps[mid - 1] + gaps[mid])
    return med if med > 0 else 1.0
