#!/usr/bin/env python3
"""Template for converting an external event log into the ftpp file formats.

This is a stub, not a runnable importer: data access layers differ too much
to ship one. Copy it next to your extraction code and fill in the two
functions marked TODO. The output contract it targets:

  space.json     one object: profile_dim, time_unit, dimensions (name,
                 cardinality, and for duration dimensions the half-open
                 intervals plus one representative midpoint per interval)
  dataset.jsonl  one sequence per line: id, start, profile (list of floats,
                 length == profile_dim), events (strictly increasing t,
                 1-based markers, optional raw durations)

Run `ftpp params --space space.json` afterwards to sanity-check the space,
and load the dataset once: validation errors print the offending line.
"""

import json


# Declare the label space once. Duration dimensions discretize a continuous
# gap; boundaries are half-open [lo, hi) with hi = None for the last class,
# and every class needs a representative midpoint (used for MSE scoring).
SPACE = {
    "format_version": 1,
    "profile_dim": 0,          # TODO: number of per-subject profile features
    "time_unit": "days",       # informational; pick one unit and stick to it
    "dimensions": [
        {"name": "category", "cardinality": 8},   # TODO: your first marker
        {"name": "duration", "cardinality": 3,
         "intervals": [[0.0, 1.0], [1.0, 5.0], [5.0, None]],
         "midpoints": [0.5, 3.0, 7.0]},
    ],
}


def iter_subjects(source):
    """TODO: yield (subject_id, profile_features, raw_event_list) from your store.

    raw_event_list must end up sorted by time; timestamps are floats in the
    unit declared above. What a "raw event" is depends on the source: a row,
    a joined record, an admission, a job change.
    """
    raise NotImplementedError


def to_event(raw, previous_t):
    """TODO: map one raw event to (t, markers, durations).

    markers are 1-based and ordered like SPACE["dimensions"]. For a duration
    dimension, classify the gap since the previous event and keep the raw gap
    so evaluation can score midpoint-substituted predictions:

        gap = t - previous_t
        cls = next(i for i, (lo, hi) in enumerate(intervals)
                   if gap >= lo and (hi is None or gap < hi))
        markers[duration_index] = cls + 1
        durations[duration_index] = gap
    """
    raise NotImplementedError


def main(source, space_path="space.json", dataset_path="dataset.jsonl"):
    with open(space_path, "w") as fh:
        json.dump(SPACE, fh, indent=2)

    with open(dataset_path, "w") as fh:
        for subject_id, profile, raw_events in iter_subjects(source):
            events, prev_t = [], 0.0
            for raw in sorted(raw_events, key=lambda r: r["t"]):
                t, markers, durations = to_event(raw, prev_t)
                record = {"t": t, "markers": markers}
                if any(d is not None for d in durations):
                    record["durations"] = durations
                events.append(record)
                prev_t = t
            fh.write(json.dumps({
                "id": str(subject_id),
                "start": 0.0,
                "profile": list(profile),
                "events": events,
            }) + "\n")


if __name__ == "__main__":
    raise SystemExit("fill in iter_subjects/to_event before running")
