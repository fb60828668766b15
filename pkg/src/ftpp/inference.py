"""Next-event prediction, evaluation metrics, and cross validation."""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np

from .core import Dataset, EventSequence
from .errors import ConfigError
from .features import build_features, marker_probabilities
from .kernels import KernelSpec
from .objective import build_training_matrix
from .training import FitConfig, TrainedModel, fit_model


@dataclass(frozen=True)
class Prediction:
    """Per-dimension distributions and rankings for one upcoming event.

    Marker indices are 0-based here; the IO layer shifts to 1-based when
    writing records. Ties rank the lower marker index first, and joint
    tuples are ranked by the product of per-dimension probabilities.
    """

    sequence_id: str
    t: float
    probabilities: tuple[np.ndarray, ...]
    argmax: tuple[int, ...]
    topk: tuple[tuple[tuple[int, float], ...], ...]
    joint_topk: tuple[tuple[tuple[int, ...], float], ...]


def _rank_dim(probs: np.ndarray, k: int) -> tuple[tuple[int, float], ...]:
    order = np.lexsort((np.arange(len(probs)), -probs))
    return tuple((int(i), float(probs[i])) for i in order[:k])


def _joint_topk(
    prob_vectors: list[np.ndarray], k: int
) -> list[tuple[tuple[int, ...], float]]:
    """Exact top-k marker tuples under the product of independent marginals.

    Best-first search over the rank lattice: starting from every
    dimension's top value, each popped tuple spawns successors that demote
    one dimension one rank. Probabilities are combined in log space.
    """
    ranked = [_rank_dim(p, len(p)) for p in prob_vectors]
    logs = [
        np.array([math.log(prob) if prob > 0 else -math.inf for _, prob in dim])
        for dim in ranked
    ]
    start = (0,) * len(ranked)
    start_score = float(sum(l[0] for l in logs))
    heap = [(-start_score, start)]
    seen = {start}
    out: list[tuple[tuple[int, ...], float]] = []
    while heap and len(out) < k:
        neg, pos = heapq.heappop(heap)
        tup = tuple(ranked[z][p][0] for z, p in enumerate(pos))
        out.append((tup, math.exp(-neg)))
        for z in range(len(ranked)):
            if pos[z] + 1 < len(ranked[z]):
                nxt = pos[:z] + (pos[z] + 1,) + pos[z + 1 :]
                if nxt not in seen:
                    seen.add(nxt)
                    score = neg - logs[z][pos[z] + 1] + logs[z][pos[z]]
                    heapq.heappush(heap, (score, nxt))
    return out


def _predict_from_features(model: TrainedModel, values, seq_id, t, k) -> Prediction:
    probs = tuple(
        marker_probabilities(model.theta.block(z), values)
        for z in range(model.space.n_dims)
    )
    argmax = tuple(int(np.argmax(p)) for p in probs)  # argmax keeps the lowest index on ties
    topk = tuple(_rank_dim(p, k) for p in probs)
    joint = tuple(_joint_topk(list(probs), k))
    return Prediction(seq_id, float(t), probs, argmax, topk, joint)


def predict_next(
    model: TrainedModel, seq: EventSequence, t: float | None = None, k: int = 5
) -> Prediction:
    """Predict the markers of the next event of ``seq`` as of time ``t``.

    ``t`` defaults to the last event's timestamp (the sequence start when
    the sequence is empty); it must not precede the last event. The full
    history enters the features.
    """
    if seq.profile.shape != (model.space.profile_dim,):
        raise ConfigError(
            f"sequence {seq.id!r} profile length {seq.profile.shape[0]} does not "
            f"match model profile_dim {model.space.profile_dim}"
        )
    last_t = seq.events[-1].t if seq.events else seq.start
    if t is None:
        t = last_t
    fv = build_features(
        seq, model.space, model.kernel, t, history_end=len(seq.events),
        mode=model.feature_mode,
        profile=model.standardizer.transform(seq.profile),
    )
    return _predict_from_features(model, fv.values, seq.id, t, k)


@dataclass(frozen=True)
class EvalReport:
    """Aggregated prediction metrics over a test split.

    ``topk[z][j]`` is the fraction of events whose true value in dimension
    ``z`` appears among the top ``j+1`` predictions; ``topk_joint`` is the
    same for full marker tuples. ``duration_mse`` maps duration-dimension
    index to the mean squared error of midpoint-substituted predictions
    (only over events carrying raw durations).
    """

    n_events: int
    ac: tuple[float, ...]
    ac_joint: float
    topk: tuple[tuple[float, ...], ...]
    topk_joint: tuple[float, ...]
    duration_mse: dict[int, float] = field(default_factory=dict)
    dim_names: tuple[str, ...] = ()

    def summary_lines(self) -> list[str]:
        lines = [f"events scored: {self.n_events}"]
        for z, name in enumerate(self.dim_names):
            lines.append(f"accuracy[{name}]: {self.ac[z]:.4f}")
        lines.append(f"accuracy[joint]: {self.ac_joint:.4f}")
        for z, name in enumerate(self.dim_names):
            curve = ", ".join(f"{v:.4f}" for v in self.topk[z])
            lines.append(f"top-k[{name}]: {curve}")
        lines.append("top-k[joint]: " + ", ".join(f"{v:.4f}" for v in self.topk_joint))
        for z, mse in sorted(self.duration_mse.items()):
            lines.append(f"duration-mse[{self.dim_names[z]}]: {mse:.6f}")
        return lines


def evaluate(model: TrainedModel, test: Dataset, k_max: int = 5) -> EvalReport:
    """Score every event of ``test`` with the training-time convention.

    Each event is predicted from the state at the previous event's
    timestamp (sequence start for the first event) with that event's
    history included, exactly as the rows the solvers saw were built.
    """
    if (
        model.space.cardinalities != test.space.cardinalities
        or model.space.profile_dim != test.space.profile_dim
    ):
        raise ConfigError("model and dataset marker spaces disagree")
    if test.n_events() == 0:
        raise ConfigError("cannot evaluate an empty test set")
    z_dims = model.space.n_dims
    tm = build_training_matrix(test, model.kernel, model.standardizer, model.feature_mode)

    hits = np.zeros(z_dims)
    joint_hits = 0
    topk_hits = np.zeros((z_dims, k_max))
    topk_joint_hits = np.zeros(k_max)
    sq_err: dict[int, list[float]] = {}

    row = 0
    for seq in test.sequences:
        for i, ev in enumerate(seq.events):
            t_eval = seq.events[i - 1].t if i > 0 else seq.start
            pred = _predict_from_features(
                model, tm.features[row], seq.id, t_eval, k_max
            )
            row += 1
            all_correct = True
            for z in range(z_dims):
                truth = ev.markers[z]
                if pred.argmax[z] == truth:
                    hits[z] += 1
                else:
                    all_correct = False
                ranked = [mk for mk, _ in pred.topk[z]]
                if truth in ranked:
                    topk_hits[z, ranked.index(truth) :] += 1
                scale = model.space.duration_scale(z)
                raw = ev.durations[z] if ev.durations else None
                if scale is not None and raw is not None:
                    mid = scale.midpoints[pred.argmax[z]]
                    sq_err.setdefault(z, []).append((mid - raw) ** 2)
            if all_correct:
                joint_hits += 1
            joint_tuples = [tup for tup, _ in pred.joint_topk]
            if ev.markers in joint_tuples:
                topk_joint_hits[joint_tuples.index(ev.markers) :] += 1

    n = float(tm.n_rows)
    return EvalReport(
        n_events=tm.n_rows,
        ac=tuple(hits / n),
        ac_joint=joint_hits / n,
        topk=tuple(tuple(r / n for r in row_) for row_ in topk_hits),
        topk_joint=tuple(v / n for v in topk_joint_hits),
        duration_mse={z: float(np.mean(v)) for z, v in sq_err.items()},
        dim_names=tuple(model.space.dim_name(z) for z in range(z_dims)),
    )


@dataclass(frozen=True)
class CvReport:
    """Cross-validation result: per-fold reports plus mean/std aggregates."""

    folds: tuple[EvalReport, ...]
    mean: EvalReport
    std: EvalReport
    seed: int

    def summary_lines(self) -> list[str]:
        lines = [f"folds: {len(self.folds)} (seed {self.seed})"]
        for z, name in enumerate(self.mean.dim_names):
            lines.append(
                f"accuracy[{name}]: {self.mean.ac[z]:.4f} +/- {self.std.ac[z]:.4f}"
            )
        lines.append(
            f"accuracy[joint]: {self.mean.ac_joint:.4f} +/- {self.std.ac_joint:.4f}"
        )
        return lines


def _aggregate(reports: list[EvalReport], fn) -> EvalReport:
    z_dims = len(reports[0].ac)
    k_max = len(reports[0].topk_joint)
    mse_keys = set()
    for r in reports:
        mse_keys |= set(r.duration_mse)
    return EvalReport(
        n_events=int(fn([r.n_events for r in reports])),
        ac=tuple(fn([r.ac[z] for r in reports]) for z in range(z_dims)),
        ac_joint=fn([r.ac_joint for r in reports]),
        topk=tuple(
            tuple(fn([r.topk[z][j] for r in reports]) for j in range(k_max))
            for z in range(z_dims)
        ),
        topk_joint=tuple(
            fn([r.topk_joint[j] for r in reports]) for j in range(k_max)
        ),
        duration_mse={
            z: fn([r.duration_mse[z] for r in reports if z in r.duration_mse])
            for z in sorted(mse_keys)
        },
        dim_names=reports[0].dim_names,
    )


def fold_assignments(n_sequences: int, folds: int, seed: int) -> list[np.ndarray]:
    """Deterministic sequence-level fold split from a seeded shuffle."""
    perm = np.random.default_rng(seed).permutation(n_sequences)
    return [np.sort(chunk) for chunk in np.array_split(perm, folds)]


def cross_validate(
    dataset: Dataset,
    kernel: KernelSpec,
    cfg: FitConfig,
    folds: int = 10,
    seed: int = 0,
    k_max: int = 5,
    jobs: int = 1,
) -> CvReport:
    """Sequence-level k-fold cross validation with a seeded shuffle.

    Folds never split a sequence, so no history leaks between train and
    test. Fold fits are independent; ``jobs`` bounds how many run at once.
    """
    n = len(dataset.sequences)
    if n < folds:
        raise ConfigError(f"{folds} folds need at least {folds} sequences, got {n}")
    if folds < 2:
        raise ConfigError("cross validation needs at least 2 folds")
    assignments = fold_assignments(n, folds, seed)

    def run_fold(test_idx: np.ndarray) -> EvalReport:
        test_set = set(int(i) for i in test_idx)
        train = Dataset(
            dataset.space,
            tuple(s for i, s in enumerate(dataset.sequences) if i not in test_set),
        )
        test = Dataset(
            dataset.space,
            tuple(s for i, s in enumerate(dataset.sequences) if i in test_set),
        )
        model, _ = fit_model(train, kernel, cfg)
        return evaluate(model, test, k_max=k_max)

    if jobs > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=jobs) as pool:
            reports = list(pool.map(run_fold, assignments))
    else:
        reports = [run_fold(idx) for idx in assignments]

    mean = _aggregate(reports, lambda xs: float(np.mean(xs)))
    std = _aggregate(reports, lambda xs: float(np.std(xs)))
    return CvReport(tuple(reports), mean, std, seed)


@dataclass(frozen=True)
class ColumnStat:
    label: str
    norm: float
    active: bool


def inspect_sparsity(model: TrainedModel, tol: float = 1e-8) -> list[ColumnStat]:
    """Column norms of the fitted parameters, strongest first.

    A column is active when its Euclidean norm exceeds ``tol``; the labels
    name the profile coordinate or marker value the column responds to.
    """
    norms = np.linalg.norm(model.theta.values, axis=0)
    labels = model.space.column_labels()
    stats = [
        ColumnStat(label, float(norm), bool(norm > tol))
        for label, norm in zip(labels, norms)
    ]
    stats.sort(key=lambda s: -s.norm)
    return stats
