"""Command-line interface: synth, train, predict, eval, cv, inspect, params."""

from __future__ import annotations

import json
import os

import click

from . import dataio, report
from .core import Dataset, Event, EventSequence, param_counts
from .errors import FtppError, NumericError
from .inference import cross_validate, evaluate, inspect_sparsity, predict_next
from .kernels import FORMS, KernelSpec
from .objective import RegularizationSpec
from .solvers import FistaConfig
from .synth import generate
from .training import SOLVERS, FitConfig, fit_model


def _fail(message: str) -> "click.ClickException":
    return click.ClickException(message)


def recenter_dataset(dataset: Dataset) -> Dataset:
    """Shift each sequence so its declared start time becomes zero."""
    sequences = []
    for seq in dataset.sequences:
        shifted = tuple(
            Event(t=ev.t - seq.start, markers=ev.markers, durations=ev.durations)
            for ev in seq.events
        )
        sequences.append(
            EventSequence(id=seq.id, profile=seq.profile, events=shifted, start=0.0)
        )
    return Dataset(dataset.space, tuple(sequences))


def _load_data(data_path, space_path, recenter: bool) -> Dataset:
    space = dataio.load_space(space_path)
    dataset = dataio.load_dataset(data_path, space)
    return recenter_dataset(dataset) if recenter else dataset


@click.group()
@click.version_option(package_name="ftpp")
def main():
    """Decoupled learning and prediction for factorial marked event sequences."""


# ------------------------------------------------------------------------ synth

@main.command()
@click.option("--spec", "spec_path", required=True, type=click.Path(exists=True),
              help="Generator spec (JSON).")
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False),
              help="Output directory.")
def synth(spec_path, out_dir):
    """Generate a synthetic dataset plus its ground-truth sidecar."""
    try:
        spec = dataio.load_generator_spec(spec_path)
        dataset, truth = generate(spec)
    except FtppError as exc:
        raise _fail(str(exc))
    os.makedirs(out_dir, exist_ok=True)
    dataio.save_space(spec.space, os.path.join(out_dir, "space.json"))
    dataio.save_dataset(dataset, os.path.join(out_dir, "dataset.jsonl"))
    dataio.save_ground_truth(truth, os.path.join(out_dir, "truth.json"))
    click.echo(
        f"wrote {len(dataset.sequences)} sequences / {dataset.n_events()} events "
        f"to {out_dir}"
    )


# ------------------------------------------------------------------------ train

def _train_options(fn):
    opts = [
        click.option("--kernel", "kernel_form", type=click.Choice(FORMS), default="hp",
                     show_default=True, help="Kernel family."),
        click.option("--solver", type=click.Choice(SOLVERS), default="softmax",
                     show_default=True),
        click.option("--lambda", "lam", type=float, default=0.0, show_default=True,
                     help="Overall regularization weight (scales with dataset size: "
                          "the loss is a sum over events, not a mean)."),
        click.option("--alpha", type=float, default=0.5, show_default=True,
                     help="Entrywise-vs-column split of the penalty, in (0,1)."),
        click.option("--w", type=float, default=1.0, show_default=True,
                     help="Decay rate (hp kernel)."),
        click.option("--sigma", default="1.0", show_default=True,
                     help="Bandwidth (mcp kernel); 'auto' uses the median "
                          "inter-event gap of the training split."),
        click.option("--init", type=click.Choice(["zero", "uniform"]), default="zero",
                     show_default=True),
        click.option("--u", type=float, default=1.0, show_default=True,
                     help="Splitting penalty weight (admm solver)."),
        click.option("--outer-tol", type=float, default=0.01, show_default=True),
        click.option("--inner-tol", type=float, default=0.01, show_default=True),
        click.option("--max-outer", type=int, default=500, show_default=True),
        click.option("--max-inner", type=int, default=200, show_default=True),
        click.option("--plain-lr", is_flag=True,
                     help="Use raw current-state features instead of decayed history."),
        click.option("--uni", is_flag=True,
                     help="Zero all cross-dimension blocks (single-dimension variant)."),
        click.option("--recenter", is_flag=True,
                     help="Shift every sequence's times so it starts at 0."),
    ]
    for opt in reversed(opts):
        fn = opt(fn)
    return fn


def _build_fit_config(kernel_form, solver, lam, alpha, w, sigma, init, u,
                      outer_tol, inner_tol, max_outer, max_inner, plain_lr, uni,
                      seed=None):
    sigma_auto = sigma == "auto"
    kernel = KernelSpec(
        form=kernel_form, w=w, sigma=1.0 if sigma_auto else float(sigma)
    )
    cfg = FitConfig(
        solver=solver,
        regularization=RegularizationSpec(lam, alpha),
        fista=FistaConfig(tol=inner_tol, max_iter=max_inner),
        u=u,
        outer_tol=outer_tol,
        max_outer=max_outer,
        init=init,
        seed=seed,
        uni=uni,
        feature_mode="current" if plain_lr else "history",
        sigma_auto=sigma_auto,
    )
    return kernel, cfg


@main.command()
@click.option("--data", "data_path", required=True, type=click.Path(exists=True))
@click.option("--space", "space_path", required=True, type=click.Path(exists=True))
@_train_options
@click.option("--seed", type=int, default=None, help="Seed for uniform init.")
@click.option("--out", "model_path", required=True, type=click.Path(),
              help="Where to write the model file.")
@click.option("--figures/--no-figures", default=True, show_default=True,
              help="Render the convergence curve next to the trace CSV.")
def train(data_path, space_path, model_path, figures, recenter, seed, **kwargs):
    """Fit a model; writes the model file, a trace CSV, and a figure."""
    try:
        kernel, cfg = _build_fit_config(seed=seed, **kwargs)
        dataset = _load_data(data_path, space_path, recenter)
    except FtppError as exc:
        raise _fail(str(exc))

    stem = os.path.splitext(model_path)[0]
    os.makedirs(os.path.dirname(model_path) or ".", exist_ok=True)
    trace_path = stem + ".trace.csv"
    try:
        model, trace = fit_model(dataset, kernel, cfg)
    except NumericError as exc:
        partial = getattr(exc, "trace", None)
        if partial is not None and partial.rows:
            partial.save_csv(trace_path)
            click.echo(f"partial trace dumped to {trace_path}", err=True)
        raise _fail(f"training failed: {exc}")
    except FtppError as exc:
        raise _fail(str(exc))

    dataio.save_model(model, model_path)
    trace.save_csv(trace_path)
    if figures:
        report.convergence_figure({cfg.solver: trace}, stem + ".convergence.png")
    meta = model.metadata
    click.echo(
        f"{cfg.solver}: objective {meta['final_objective']:.6g} after "
        f"{meta['iterations']} iterations "
        f"({'converged' if meta['converged'] else 'iteration cap reached'})"
    )
    click.echo(f"model written to {model_path}")


# ---------------------------------------------------------------------- predict

def _prediction_record(pred) -> dict:
    return {
        "id": pred.sequence_id,
        "t": pred.t,
        "argmax": [m + 1 for m in pred.argmax],
        "probabilities": [[float(p) for p in vec] for vec in pred.probabilities],
        "topk": [
            [[m + 1, p] for m, p in dim_ranks] for dim_ranks in pred.topk
        ],
        "joint_topk": [
            [[m + 1 for m in tup], p] for tup, p in pred.joint_topk
        ],
    }


@main.command()
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--data", "data_path", required=True, type=click.Path(exists=True))
@click.option("--at", "at", default="last-event", show_default=True,
              help="Evaluation time: 'last-event' or an absolute timestamp.")
@click.option("--topk", type=int, default=5, show_default=True)
@click.option("--recenter", is_flag=True)
@click.option("--out", "out_path", type=click.Path(), default=None,
              help="Write JSONL records here instead of stdout.")
def predict(model_path, data_path, at, topk, recenter, out_path):
    """Predict the next event's markers for every sequence in the file."""
    try:
        model = dataio.load_model(model_path)
        dataset = dataio.load_dataset(data_path, model.space)
        if recenter:
            dataset = recenter_dataset(dataset)
        t = None if at == "last-event" else float(at)
        records = [
            _prediction_record(predict_next(model, seq, t=t, k=topk))
            for seq in dataset.sequences
        ]
    except (FtppError, ValueError) as exc:
        raise _fail(str(exc))
    text = "".join(json.dumps(rec) + "\n" for rec in records)
    if out_path:
        dataio.write_text_atomic(out_path, text)
        click.echo(f"{len(records)} predictions written to {out_path}")
    else:
        click.echo(text, nl=False)


# ------------------------------------------------------------------------- eval

@main.command(name="eval")
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--data", "data_path", required=True, type=click.Path(exists=True))
@click.option("--topk", type=int, default=5, show_default=True)
@click.option("--recenter", is_flag=True)
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--figures/--no-figures", default=True, show_default=True)
def eval_cmd(model_path, data_path, topk, recenter, out_dir, figures):
    """Score a test file with the training-time convention; write report files."""
    try:
        model = dataio.load_model(model_path)
        dataset = dataio.load_dataset(data_path, model.space)
        if recenter:
            dataset = recenter_dataset(dataset)
        result = evaluate(model, dataset, k_max=topk)
    except FtppError as exc:
        raise _fail(str(exc))
    written = report.write_eval_outputs(result, out_dir, figures=figures)
    for line in result.summary_lines():
        click.echo(line)
    click.echo("wrote " + ", ".join(written))


# --------------------------------------------------------------------------- cv

@main.command()
@click.option("--data", "data_path", required=True, type=click.Path(exists=True))
@click.option("--space", "space_path", required=True, type=click.Path(exists=True))
@click.option("--folds", type=int, default=10, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True,
              help="Seed for the fold shuffle (and uniform init, if used).")
@_train_options
@click.option("--topk", type=int, default=5, show_default=True)
@click.option("--jobs", type=int, default=1, show_default=True,
              help="Concurrent fold fits.")
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--figures/--no-figures", default=True, show_default=True)
def cv(data_path, space_path, folds, seed, topk, jobs, out_dir, figures,
       recenter, **kwargs):
    """Sequence-level k-fold cross validation; writes an aggregated report."""
    try:
        kernel, cfg = _build_fit_config(seed=seed, **kwargs)
        dataset = _load_data(data_path, space_path, recenter)
        result = cross_validate(
            dataset, kernel, cfg, folds=folds, seed=seed, k_max=topk, jobs=jobs
        )
    except FtppError as exc:
        raise _fail(str(exc))
    written = report.write_cv_outputs(result, out_dir, figures=figures)
    for line in result.summary_lines():
        click.echo(line)
    click.echo("wrote " + ", ".join(written))


# ---------------------------------------------------------------------- inspect

@main.command()
@click.option("--model", "model_path", required=True, type=click.Path(exists=True))
@click.option("--out", "out_path", type=click.Path(), default=None,
              help="Also write the table as CSV.")
def inspect(model_path, out_path):
    """Column-norm table of a fitted model: which features are active."""
    try:
        model = dataio.load_model(model_path)
    except FtppError as exc:
        raise _fail(str(exc))
    stats = inspect_sparsity(model)
    width = max(len(s.label) for s in stats)
    click.echo(f"{'column'.ljust(width)}  {'l2 norm':>12}  active")
    for s in stats:
        click.echo(f"{s.label.ljust(width)}  {s.norm:12.6f}  {'yes' if s.active else 'no'}")
    n_active = sum(s.active for s in stats)
    click.echo(f"{n_active}/{len(stats)} columns active")
    if out_path:
        import csv as _csv

        os.makedirs(os.path.dirname(out_path) or ".", exist_ok=True)
        with open(out_path, "w", newline="") as fh:
            writer = _csv.writer(fh)
            writer.writerow(["column", "l2_norm", "active"])
            for s in stats:
                writer.writerow([s.label, repr(s.norm), int(s.active)])
        click.echo(f"table written to {out_path}")


# ----------------------------------------------------------------------- params

@main.command()
@click.option("--space", "space_path", required=True, type=click.Path(exists=True))
def params(space_path):
    """Decoupled-vs-coupled size table for a marker space."""
    try:
        space = dataio.load_space(space_path)
        counts = param_counts(space)
    except (FtppError, OverflowError) as exc:
        raise _fail(str(exc))
    click.echo(f"{'':12}  {'state dim':>12}  {'parameters':>14}")
    click.echo(f"{'decoupled':12}  {counts.decoupled_state_dim:>12}  {counts.decoupled:>14}")
    click.echo(f"{'coupled':12}  {counts.coupled_state_dim:>12}  {counts.coupled:>14}")


if __name__ == "__main__":
    main()
