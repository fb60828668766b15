"""The two solvers for the regularized objective and their shared machinery.

``admm_fit`` follows the splitting scheme: an accelerated proximal-gradient
inner solve of the smooth + l1 subproblem, a column-wise group shrinkage
for the auxiliary variable, and a scaled dual update. ``softmax_fit``
minimizes the same objective directly with one accelerated
proximal-gradient loop whose prox handles the full sparse-group penalty in
closed form.

Both record a per-iteration trace of the regularized objective. The
accelerated loop keeps a monotone safeguard: a candidate step that would
increase the objective is discarded (the momentum sequence still advances),
so recorded objective sequences never increase.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .core import ParamMatrix
from .errors import ConfigError, NumericError
from .objective import (
    RegularizationSpec,
    TrainingMatrix,
    loss,
    loss_gradient,
    penalty,
    regularized_objective,
)
from .prox import group_soft_threshold_columns, soft_threshold, sparse_group_prox

_NORM_FLOOR = 1e-12
_STEP_FLOOR = 1e-12
_STALL_LIMIT = 10  # consecutive non-decreasing outer objectives before warning


@dataclass(frozen=True)
class FistaConfig:
    """Inner-loop settings: initial step, backtracking factor, stopping rule."""

    step_init: float = 1.0
    backtrack: float = 0.8
    tol: float = 0.01
    max_iter: int = 200

    def __post_init__(self):
        if not self.step_init > 0:
            raise ConfigError("initial step size must be positive")
        if not 0 < self.backtrack < 1:
            raise ConfigError("backtracking factor must lie in (0, 1)")
        if not self.tol > 0:
            raise ConfigError("relative-change tolerance must be positive")


@dataclass(frozen=True)
class TraceRow:
    iteration: int
    objective: float
    primal_residual: float
    wall_time: float


@dataclass
class AdmmState:
    """Final splitting state: parameters, auxiliary, dual, and penalty weight."""

    theta: np.ndarray
    gamma: np.ndarray
    beta: np.ndarray
    u: float
    iteration: int


@dataclass
class ConvergenceTrace:
    """Objective-vs-iteration record of a fit, serializable to CSV."""

    solver: str
    rows: list[TraceRow] = field(default_factory=list)
    converged: bool = False
    total_inner_iterations: int = 0
    divergence_warning: bool = False
    admm_state: AdmmState | None = None

    def objectives(self) -> list[float]:
        return [r.objective for r in self.rows]

    def append(self, iteration: int, objective: float, residual: float, wall: float):
        self.rows.append(TraceRow(iteration, float(objective), float(residual), wall))

    def save_csv(self, path) -> None:
        import csv

        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["iteration", "objective", "primal_residual", "wall_time"])
            for row in self.rows:
                writer.writerow(
                    [row.iteration, repr(row.objective), repr(row.primal_residual),
                     f"{row.wall_time:.6f}"]
                )


def _rel_change(new: np.ndarray, old: np.ndarray) -> float:
    return float(
        np.linalg.norm(new - old) / max(np.linalg.norm(new), _NORM_FLOOR)
    )


@dataclass
class FistaResult:
    theta: np.ndarray
    objectives: list[float]
    n_iterations: int
    converged: bool
    step: float


def fista_solve(
    theta_init: np.ndarray,
    smooth_value: Callable[[np.ndarray], float],
    smooth_grad: Callable[[np.ndarray], np.ndarray],
    prox: Callable[[np.ndarray, float], np.ndarray],
    penalty_value: Callable[[np.ndarray], float],
    cfg: FistaConfig,
) -> FistaResult:
    """Accelerated proximal gradient with backtracking line search.

    Minimizes ``smooth_value + penalty_value`` where ``prox(v, step)`` is
    the proximal map of the penalty. Each accepted step satisfies the
    curvature condition g(x+) <= g(y) + <grad g(y), x+ - y> + ||x+ - y||^2 / (2 step);
    the step size only shrinks, and shrinking below 1e-12 raises
    :class:`NumericError`. Candidates that would raise the total objective
    are rejected in favor of the previous iterate, keeping the recorded
    objective sequence non-increasing.
    """
    x = np.array(theta_init, dtype=float)
    v = x.copy()
    step = cfg.step_init
    f_x = smooth_value(x) + penalty_value(x)
    if not np.isfinite(f_x):
        raise NumericError("objective is non-finite at the initial point")
    objectives = [f_x]
    converged = False
    n_done = 0

    for i in range(1, cfg.max_iter + 1):
        tau = 2.0 / (i + 1)
        y = (1.0 - tau) * x + tau * v
        g_y = smooth_value(y)
        grad_y = smooth_grad(y)
        if not (np.isfinite(g_y) and np.all(np.isfinite(grad_y))):
            exc = NumericError("smooth oracle returned a non-finite value")
            exc.objectives = objectives
            raise exc

        while True:
            candidate = prox(y - step * grad_y, step)
            diff = candidate - y
            g_cand = smooth_value(candidate)
            bound = g_y + float(np.vdot(grad_y, diff)) + float(np.vdot(diff, diff)) / (2.0 * step)
            if g_cand <= bound + 1e-12 * max(1.0, abs(g_y)):
                break
            step *= cfg.backtrack
            if step < _STEP_FLOOR:
                exc = NumericError("line search stagnated: step size underflow")
                exc.objectives = objectives
                raise exc

        v = x + (candidate - x) / tau
        rel = _rel_change(candidate, x)
        f_cand = g_cand + penalty_value(candidate)
        if f_cand <= f_x:
            x = candidate
            f_x = f_cand
        objectives.append(f_x)
        n_done = i
        if rel < cfg.tol:
            converged = True
            break

    return FistaResult(x, objectives, n_done, converged, step)


def gamma_update(theta: np.ndarray, beta: np.ndarray, u: float, lam2: float) -> np.ndarray:
    """Auxiliary-variable update: column-wise group shrinkage of theta - beta/u."""
    return group_soft_threshold_columns(theta - beta / u, lam2 / u)


def _initial_theta(tm: TrainingMatrix, init, seed) -> np.ndarray:
    shape = (tm.space.total_marker_dim(), tm.space.feature_dim())
    if isinstance(init, np.ndarray):
        if init.shape != shape:
            raise ConfigError(f"init shape {init.shape} != expected {shape}")
        return np.array(init, dtype=float)
    if init == "zero":
        return np.zeros(shape)
    if init == "uniform":
        rng = np.random.default_rng(seed)
        return rng.uniform(-1.0, 1.0, size=shape)
    raise ConfigError(f"unknown init {init!r}; use 'zero', 'uniform', or an array")


def _apply_mask(arr: np.ndarray, mask: np.ndarray | None) -> np.ndarray:
    return arr if mask is None else arr * mask


def admm_fit(
    tm: TrainingMatrix,
    reg: RegularizationSpec,
    u: float = 1.0,
    fista: FistaConfig = FistaConfig(),
    outer_tol: float = 0.01,
    max_outer: int = 500,
    init="zero",
    seed: int | None = None,
    support_mask: np.ndarray | None = None,
) -> tuple[ParamMatrix, ConvergenceTrace]:
    """Alternating-direction fit of the sparse-group objective.

    Each outer iteration solves the smooth + l1 subproblem with
    :func:`fista_solve` on the penalty-augmented loss, applies the
    column-wise group shrinkage to the auxiliary variable, and takes the
    scaled dual step. Stops when the relative change of the parameters
    drops below ``outer_tol``. ``support_mask`` (same shape as the
    parameters, entries 0/1) restricts the fit to a coordinate subspace.
    """
    if not u > 0:
        raise ConfigError("penalty parameter u must be positive")
    theta = _apply_mask(_initial_theta(tm, init, seed), support_mask)
    gamma = theta.copy()
    beta = np.zeros_like(theta)
    lam1, lam2 = reg.lam1, reg.lam2

    trace = ConvergenceTrace(solver="admm")
    t0 = time.perf_counter()
    start_obj = regularized_objective(theta, tm, reg)
    trace.append(0, start_obj, float(np.linalg.norm(theta - gamma)), 0.0)
    stall = 0

    for k in range(1, max_outer + 1):
        target = gamma + beta / u

        def smooth_value(th):
            d = th - target
            return loss(th, tm) + 0.5 * u * float(np.vdot(d, d))

        def smooth_grad(th):
            return loss_gradient(th, tm) + u * (th - target)

        def prox(v, step):
            return _apply_mask(soft_threshold(v, lam1 * step), support_mask)

        def penalty_value(th):
            return lam1 * float(np.abs(th).sum())

        try:
            inner = fista_solve(theta, smooth_value, smooth_grad, prox, penalty_value, fista)
        except NumericError as exc:
            exc.trace = trace  # let callers dump what was computed so far
            raise
        theta_new = inner.theta
        trace.total_inner_iterations += inner.n_iterations

        gamma = _apply_mask(gamma_update(theta_new, beta, u, lam2), support_mask)
        beta = beta - u * (theta_new - gamma)

        objective = regularized_objective(theta_new, tm, reg)
        residual = float(np.linalg.norm(theta_new - gamma))
        trace.append(k, objective, residual, time.perf_counter() - t0)

        if objective >= trace.rows[-2].objective:
            stall += 1
            if stall >= _STALL_LIMIT:
                trace.divergence_warning = True
        else:
            stall = 0

        rel = _rel_change(theta_new, theta)
        theta = theta_new
        if rel < outer_tol:
            trace.converged = True
            break

    trace.admm_state = AdmmState(theta, gamma, beta, u, len(trace.rows) - 1)
    return ParamMatrix(theta, tm.space), trace


def softmax_fit(
    tm: TrainingMatrix,
    reg: RegularizationSpec,
    fista: FistaConfig = FistaConfig(),
    init="zero",
    seed: int | None = None,
    support_mask: np.ndarray | None = None,
) -> tuple[ParamMatrix, ConvergenceTrace]:
    """Direct fit: accelerated proximal gradient on the full objective.

    The loss is the sum of independent softmax-classifier losses, one per
    marker dimension, so a single proximal-gradient loop with the
    closed-form sparse-group prox minimizes the same objective the
    splitting solver targets.
    """
    theta0 = _apply_mask(_initial_theta(tm, init, seed), support_mask)
    lam1, lam2 = reg.lam1, reg.lam2

    def smooth_value(th):
        return loss(th, tm)

    def smooth_grad(th):
        return loss_gradient(th, tm)

    def prox(v, step):
        return _apply_mask(sparse_group_prox(v, lam1 * step, lam2 * step), support_mask)

    def penalty_value(th):
        return penalty(th, reg)

    t0 = time.perf_counter()
    try:
        result = fista_solve(theta0, smooth_value, smooth_grad, prox, penalty_value, fista)
    except NumericError as exc:
        partial = ConvergenceTrace(solver="softmax")
        for i, obj in enumerate(getattr(exc, "objectives", [])):
            partial.append(i, obj, 0.0, 0.0)
        exc.trace = partial
        raise
    wall = time.perf_counter() - t0

    trace = ConvergenceTrace(solver="softmax")
    n = len(result.objectives)
    for i, obj in enumerate(result.objectives):
        # Wall time is interpolated; only the endpoint is measured.
        trace.append(i, obj, 0.0, wall * i / max(n - 1, 1))
    trace.converged = result.converged
    trace.total_inner_iterations = result.n_iterations
    return ParamMatrix(result.theta, tm.space), trace


def uni_support_mask(space) -> np.ndarray:
    """Mask that zeroes every cross-dimension block, keeping profile columns.

    Fitting under this mask reproduces the single-dimension variant: each
    dimension's rows may only use the profile and that dimension's own
    marker history.
    """
    mask = np.zeros((space.total_marker_dim(), space.feature_dim()))
    mask[:, : space.profile_dim] = 1.0
    for z in range(space.n_dims):
        rows = slice(space.row_offset(z), space.row_offset(z) + space.cardinalities[z])
        cols = slice(
            space.column_offset(z), space.column_offset(z) + space.cardinalities[z]
        )
        mask[rows, cols] = 1.0
    return mask
