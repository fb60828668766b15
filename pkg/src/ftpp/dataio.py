"""On-disk formats: marker spaces, datasets, models, ground-truth sidecars.

All formats are versioned JSON (one JSON object per line for datasets,
which are ragged). Marker values are 1-based on disk and shifted to
0-based on load. Floats are written with ``repr`` so save/load round-trips
bit-for-bit. Writes go through a temp file and an atomic rename.
"""

from __future__ import annotations

import json
import os
import tempfile
import warnings

import numpy as np

from .core import (
    Dataset,
    DurationScale,
    Event,
    EventSequence,
    MarkerSpace,
    ParamMatrix,
    validate,
)
from .errors import ConfigError, DataFormatError
from .features import Standardizer
from .kernels import KernelSpec
from .objective import RegularizationSpec
from .synth import GapSpec, GeneratorSpec, GroundTruth, LengthSpec, ThetaSpec
from .training import TrainedModel

FORMAT_VERSION = 1


def _check_version(obj: dict, what: str) -> None:
    version = obj.get("format_version")
    if version != FORMAT_VERSION:
        raise ConfigError(
            f"{what} has format_version {version!r}; this build reads {FORMAT_VERSION}"
        )


def write_text_atomic(path, text: str) -> None:
    path = os.fspath(path)
    directory = os.path.dirname(path) or "."
    os.makedirs(directory, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_json_atomic(path, obj) -> None:
    write_text_atomic(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------- marker space

def space_to_dict(space: MarkerSpace) -> dict:
    dims = []
    for z, m in enumerate(space.cardinalities):
        entry: dict = {"name": space.dim_name(z), "cardinality": m}
        scale = space.duration_scale(z)
        if scale is not None:
            entry["intervals"] = [list(pair) for pair in scale.intervals]
            entry["midpoints"] = list(scale.midpoints)
        dims.append(entry)
    return {
        "format_version": FORMAT_VERSION,
        "profile_dim": space.profile_dim,
        "time_unit": space.time_unit,
        "dimensions": dims,
    }


def space_from_dict(obj: dict) -> MarkerSpace:
    _check_version(obj, "marker-space file")
    dims = obj.get("dimensions")
    if not isinstance(dims, list) or not dims:
        raise DataFormatError("marker-space file needs a non-empty 'dimensions' list")
    cards, names, scales = [], [], []
    has_durations = False
    for d in dims:
        cards.append(int(d["cardinality"]))
        names.append(str(d.get("name", f"dim{len(names) + 1}")))
        if "intervals" in d or "midpoints" in d:
            if "intervals" not in d or "midpoints" not in d:
                raise DataFormatError(
                    f"dimension {names[-1]!r}: duration needs both intervals and midpoints"
                )
            intervals = tuple(
                (float(lo), None if hi is None else float(hi))
                for lo, hi in d["intervals"]
            )
            scales.append(DurationScale(intervals, tuple(float(x) for x in d["midpoints"])))
            has_durations = True
        else:
            scales.append(None)
    return MarkerSpace(
        cardinalities=tuple(cards),
        profile_dim=int(obj.get("profile_dim", 0)),
        names=tuple(names),
        durations=tuple(scales) if has_durations else None,
        time_unit=str(obj.get("time_unit", "")),
    )


def save_space(space: MarkerSpace, path) -> None:
    write_json_atomic(path, space_to_dict(space))


def load_space(path) -> MarkerSpace:
    with open(path) as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataFormatError(f"{path}: {exc}") from exc
    return space_from_dict(obj)


# -------------------------------------------------------------------- datasets

def _sequence_to_record(seq: EventSequence) -> dict:
    events = []
    for ev in seq.events:
        rec: dict = {"t": ev.t, "markers": [m + 1 for m in ev.markers]}
        if ev.durations is not None:
            rec["durations"] = list(ev.durations)
        events.append(rec)
    record = {"id": seq.id, "profile": [float(x) for x in seq.profile], "events": events}
    if seq.start != 0.0:
        record["start"] = seq.start
    return record


def _sequence_from_record(obj: dict, line: int) -> EventSequence:
    try:
        events = []
        for rec in obj.get("events", []):
            markers = tuple(int(m) - 1 for m in rec["markers"])
            durations = rec.get("durations")
            events.append(
                Event(
                    t=float(rec["t"]),
                    markers=markers,
                    durations=None if durations is None
                    else tuple(None if d is None else float(d) for d in durations),
                )
            )
        return EventSequence(
            id=str(obj["id"]),
            profile=np.array(obj.get("profile", []), dtype=float),
            events=tuple(events),
            start=float(obj.get("start", 0.0)),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise DataFormatError(f"bad sequence record: {exc}", line=line) from exc


def save_dataset(dataset: Dataset, path) -> None:
    lines = [json.dumps(_sequence_to_record(seq)) for seq in dataset.sequences]
    write_text_atomic(path, "".join(line + "\n" for line in lines))


def load_dataset(path, space: MarkerSpace, strict: bool = True) -> Dataset:
    """Read a JSONL dataset and validate it against ``space``.

    With ``strict`` (the default) any invariant violation raises
    :class:`DataFormatError` listing every problem; pass ``strict=False``
    to get the dataset back regardless. An empty file yields an empty
    dataset (callers may warn).
    """
    sequences = []
    line_of: dict[str, int] = {}
    with open(path) as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataFormatError(str(exc), line=line_no) from exc
            seq = _sequence_from_record(obj, line_no)
            line_of.setdefault(seq.id, line_no)
            sequences.append(seq)
    dataset = Dataset(space, tuple(sequences))
    if not sequences:
        warnings.warn(f"{path}: no sequences found", stacklevel=2)
    if strict:
        problems = validate(dataset)
        if problems:
            listing = "; ".join(
                f"line {line_of.get(v.sequence_id, '?')}: {v}" for v in problems[:20]
            )
            more = "" if len(problems) <= 20 else f" (+{len(problems) - 20} more)"
            raise DataFormatError(f"{len(problems)} violations: {listing}{more}")
    return dataset


# ---------------------------------------------------------------------- models

def model_to_dict(model: TrainedModel) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "space": space_to_dict(model.space),
        "kernel": {"form": model.kernel.form, "w": model.kernel.w,
                   "sigma": model.kernel.sigma},
        "regularization": {"lam": model.regularization.lam,
                           "alpha": model.regularization.alpha},
        "standardizer": {
            "mean": [float(x) for x in model.standardizer.mean],
            "scale": [float(x) for x in model.standardizer.scale],
        },
        "feature_mode": model.feature_mode,
        "theta": [[float(x) for x in row] for row in model.theta.values],
        "metadata": model.metadata,
    }


def model_from_dict(obj: dict) -> TrainedModel:
    _check_version(obj, "model file")
    space = space_from_dict(obj["space"])
    k = obj["kernel"]
    r = obj["regularization"]
    s = obj["standardizer"]
    return TrainedModel(
        space=space,
        kernel=KernelSpec(form=k["form"], w=float(k["w"]), sigma=float(k["sigma"])),
        theta=ParamMatrix(np.array(obj["theta"], dtype=float), space),
        standardizer=Standardizer(
            np.array(s["mean"], dtype=float), np.array(s["scale"], dtype=float)
        ),
        regularization=RegularizationSpec(float(r["lam"]), float(r["alpha"])),
        feature_mode=str(obj.get("feature_mode", "history")),
        metadata=dict(obj.get("metadata", {})),
    )


def save_model(model: TrainedModel, path) -> None:
    write_json_atomic(path, model_to_dict(model))


def load_model(path) -> TrainedModel:
    with open(path) as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataFormatError(f"{path}: {exc}") from exc
    return model_from_dict(obj)


# ------------------------------------------------------------------- sidecars

def save_ground_truth(truth: GroundTruth, path) -> None:
    write_json_atomic(path, {
        "format_version": FORMAT_VERSION,
        "theta": [[float(x) for x in row] for row in truth.theta.values],
        "active_columns": list(truth.active_columns),
        "column_labels": list(truth.column_labels),
        "seed": truth.seed,
    })


def load_ground_truth(path, space: MarkerSpace) -> GroundTruth:
    with open(path) as fh:
        obj = json.load(fh)
    _check_version(obj, "ground-truth sidecar")
    return GroundTruth(
        theta=ParamMatrix(np.array(obj["theta"], dtype=float), space),
        active_columns=tuple(int(j) for j in obj["active_columns"]),
        seed=int(obj["seed"]),
        column_labels=tuple(obj.get("column_labels", [])),
    )


# ------------------------------------------------------------- generator spec

def generator_spec_from_dict(obj: dict, base_dir=".") -> GeneratorSpec:
    """Parse a generator configuration; ``space`` may be inline or a path."""
    _check_version(obj, "generator spec")
    raw_space = obj["space"]
    if isinstance(raw_space, str):
        space = load_space(os.path.join(base_dir, raw_space))
    else:
        space = space_from_dict(raw_space)
    k = obj.get("kernel", {"form": "hp"})
    kernel = KernelSpec(
        form=k.get("form", "hp"), w=float(k.get("w", 1.0)),
        sigma=float(k.get("sigma", 1.0)),
    )
    length_obj = obj.get("length", {})
    length = LengthSpec(
        kind=length_obj.get("kind", "poisson"),
        mean=float(length_obj.get("mean", 4.0)),
        minimum=int(length_obj.get("min", 1)),
    )
    theta_obj = obj.get("theta", {})
    theta = ThetaSpec(
        kind=theta_obj.get("kind", "sparse"),
        active_fraction=float(theta_obj.get("active_fraction", 0.2)),
        magnitude=float(theta_obj.get("magnitude", 2.0)),
        values=None if "values" not in theta_obj
        else np.array(theta_obj["values"], dtype=float),
    )
    gaps_obj = obj.get("gaps", {})
    gaps = GapSpec(
        kind=gaps_obj.get("kind", "exponential"),
        rate=float(gaps_obj.get("rate", 1.0)),
    )
    return GeneratorSpec(
        space=space, kernel=kernel,
        n_sequences=int(obj.get("sequences", 100)),
        length=length, theta=theta, gaps=gaps,
        seed=int(obj.get("seed", 0)),
    )


def load_generator_spec(path) -> GeneratorSpec:
    with open(path) as fh:
        try:
            obj = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataFormatError(f"{path}: {exc}") from exc
    return generator_spec_from_dict(obj, base_dir=os.path.dirname(os.fspath(path)) or ".")
