"""Report serialization and figure rendering.

Evaluation and cross-validation results are written three ways: a JSON
document (stable key order, deterministic floats), a short plain-text
summary, and a top-k precision CSV. The same paths also render matplotlib
figures (top-k precision curves, solver convergence curves) next to the
delimited output.
"""

from __future__ import annotations

import csv
import json
import os

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .dataio import write_text_atomic
from .inference import CvReport, EvalReport
from .solvers import ConvergenceTrace


def eval_report_to_dict(report: EvalReport) -> dict:
    return {
        "n_events": report.n_events,
        "accuracy": {name: report.ac[z] for z, name in enumerate(report.dim_names)},
        "accuracy_joint": report.ac_joint,
        "topk": {name: list(report.topk[z]) for z, name in enumerate(report.dim_names)},
        "topk_joint": list(report.topk_joint),
        "duration_mse": {
            report.dim_names[z]: mse for z, mse in sorted(report.duration_mse.items())
        },
    }


def cv_report_to_dict(report: CvReport) -> dict:
    return {
        "seed": report.seed,
        "n_folds": len(report.folds),
        "mean": eval_report_to_dict(report.mean),
        "std": eval_report_to_dict(report.std),
        "folds": [eval_report_to_dict(r) for r in report.folds],
    }


def _dump_json(obj: dict, path) -> None:
    write_text_atomic(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def write_topk_csv(report: EvalReport, path) -> None:
    rows = [["k", "dimension", "precision"]]
    for z, name in enumerate(report.dim_names):
        for j, value in enumerate(report.topk[z]):
            rows.append([j + 1, name, repr(value)])
    for j, value in enumerate(report.topk_joint):
        rows.append([j + 1, "joint", repr(value)])
    with open(path, "w", newline="") as fh:
        csv.writer(fh).writerows(rows)


def topk_figure(report: EvalReport, path) -> None:
    """Precision-vs-k curves, one line per dimension plus the joint tuple."""
    fig, ax = plt.subplots(figsize=(5.5, 4))
    ks = range(1, len(report.topk_joint) + 1)
    for z, name in enumerate(report.dim_names):
        ax.plot(ks, report.topk[z], marker="o", label=name)
    ax.plot(ks, report.topk_joint, marker="s", linestyle="--", label="joint")
    ax.set_xlabel("k")
    ax.set_ylabel("top-k precision")
    ax.set_xticks(list(ks))
    ax.set_ylim(0, 1.02)
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def convergence_figure(traces: dict[str, ConvergenceTrace], path) -> None:
    """Objective-vs-iteration curves for one or more solver traces."""
    fig, ax = plt.subplots(figsize=(5.5, 4))
    for label, trace in traces.items():
        ax.plot(
            [row.iteration for row in trace.rows],
            [row.objective for row in trace.rows],
            label=label,
        )
    ax.set_xlabel("iteration")
    ax.set_ylabel("regularized objective")
    ax.grid(True, alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def write_eval_outputs(report: EvalReport, out_dir, figures: bool = True) -> list[str]:
    """Write report.json, report.txt, topk.csv (and topk.png) into ``out_dir``."""
    os.makedirs(out_dir, exist_ok=True)
    written = []

    path = os.path.join(out_dir, "report.json")
    _dump_json(eval_report_to_dict(report), path)
    written.append(path)

    path = os.path.join(out_dir, "report.txt")
    write_text_atomic(path, "\n".join(report.summary_lines()) + "\n")
    written.append(path)

    path = os.path.join(out_dir, "topk.csv")
    write_topk_csv(report, path)
    written.append(path)

    if figures:
        path = os.path.join(out_dir, "topk.png")
        topk_figure(report, path)
        written.append(path)
    return written


def write_cv_outputs(report: CvReport, out_dir, figures: bool = True) -> list[str]:
    """Write cv_report.json/.txt plus mean top-k CSV (and figure)."""
    os.makedirs(out_dir, exist_ok=True)
    written = []

    path = os.path.join(out_dir, "cv_report.json")
    _dump_json(cv_report_to_dict(report), path)
    written.append(path)

    path = os.path.join(out_dir, "cv_report.txt")
    write_text_atomic(path, "\n".join(report.summary_lines()) + "\n")
    written.append(path)

    path = os.path.join(out_dir, "topk_mean.csv")
    write_topk_csv(report.mean, path)
    written.append(path)

    if figures:
        path = os.path.join(out_dir, "topk_mean.png")
        topk_figure(report.mean, path)
        written.append(path)
    return written
