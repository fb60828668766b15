"""End-to-end model fitting: standardize, build rows, run a solver, bundle."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from .core import Dataset, MarkerSpace, ParamMatrix
from .errors import ConfigError
from .features import FEATURE_MODES, Standardizer
from .kernels import KernelSpec, median_gap
from .objective import RegularizationSpec, build_training_matrix
from .solvers import (
    ConvergenceTrace,
    FistaConfig,
    admm_fit,
    softmax_fit,
    uni_support_mask,
)

SOLVERS = ("admm", "softmax")


@dataclass(frozen=True)
class TrainedModel:
    """Everything needed to reproduce predictions: parameters plus context."""

    space: MarkerSpace
    kernel: KernelSpec
    theta: ParamMatrix
    standardizer: Standardizer
    regularization: RegularizationSpec
    feature_mode: str = "history"
    metadata: dict = field(default_factory=dict)


@dataclass(frozen=True)
class FitConfig:
    """All training knobs in one place; defaults follow the solver defaults."""

    solver: str = "softmax"
    regularization: RegularizationSpec = RegularizationSpec(0.0, 0.5)
    fista: FistaConfig = FistaConfig()
    u: float = 1.0
    outer_tol: float = 0.01
    max_outer: int = 500
    init: str = "zero"
    seed: int | None = None
    uni: bool = False
    feature_mode: str = "history"
    sigma_auto: bool = False

    def __post_init__(self):
        if self.solver not in SOLVERS:
            raise ConfigError(f"unknown solver {self.solver!r}; pick one of {SOLVERS}")
        if self.feature_mode not in FEATURE_MODES:
            raise ConfigError(f"unknown feature mode {self.feature_mode!r}")


def fit_model(
    dataset: Dataset, kernel: KernelSpec, cfg: FitConfig = FitConfig()
) -> tuple[TrainedModel, ConvergenceTrace]:
    """Fit one model on ``dataset`` and return it with its convergence trace."""
    space = dataset.space
    if cfg.sigma_auto and kernel.form == "mcp":
        kernel = replace(kernel, sigma=median_gap(dataset.sequences))
    standardizer = Standardizer.fit(dataset.sequences)
    tm = build_training_matrix(dataset, kernel, standardizer, mode=cfg.feature_mode)
    mask = uni_support_mask(space) if cfg.uni else None

    if cfg.solver == "admm":
        theta, trace = admm_fit(
            tm, cfg.regularization, u=cfg.u, fista=cfg.fista,
            outer_tol=cfg.outer_tol, max_outer=cfg.max_outer,
            init=cfg.init, seed=cfg.seed, support_mask=mask,
        )
    else:
        theta, trace = softmax_fit(
            tm, cfg.regularization, fista=cfg.fista,
            init=cfg.init, seed=cfg.seed, support_mask=mask,
        )

    metadata = {
        "solver": cfg.solver,
        "iterations": trace.total_inner_iterations if cfg.solver == "softmax"
        else len(trace.rows) - 1,
        "inner_iterations": trace.total_inner_iterations,
        "final_objective": trace.rows[-1].objective,
        "converged": trace.converged,
        "init": cfg.init,
        "seed": cfg.seed,
        "uni": cfg.uni,
        "n_training_rows": tm.n_rows,
    }
    model = TrainedModel(
        space=space,
        kernel=kernel,
        theta=theta,
        standardizer=standardizer,
        regularization=cfg.regularization,
        feature_mode=cfg.feature_mode,
        metadata=metadata,
    )
    return model, trace
