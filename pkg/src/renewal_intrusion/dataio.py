"""Newline-delimited JSON data files and CSV ROC tables.

Dataset record::

    {"entry_id": "7", "t_start": 0.0, "t_end": 21.3,
     "events": [{"t": 1.2, "mark": 0.8, "label": 0}, ...]}

``mark`` and ``label`` are optional per file.  Floats are written with
``repr``, the shortest string that parses back to the identical double.
"""

import csv
import json
import math
import sys
from contextlib import contextmanager

from .exceptions import FormatError, IntrusionError
from .intervals import IntervalModel
from .model import Event, EventSequence, MarkModel

__all__ = [
    "sequence_to_record",
    "record_to_sequence",
    "read_dataset",
    "write_dataset",
    "score_record",
    "write_scores",
    "read_scores",
    "write_params",
    "read_params",
    "write_roc_csv",
]


@contextmanager
def _open(path, mode):
    if str(path) == "-":
        yield sys.stdout if "w" in mode else sys.stdin
    else:
        with open(path, mode, encoding="utf-8", newline="") as fh:
            yield fh


def _number(value, entry_id, name):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise FormatError(f"entry {entry_id!r}: field {name!r} must be a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise FormatError(f"entry {entry_id!r}: field {name!r} must be finite")
    return value


def sequence_to_record(seq):
    events = []
    for e in seq.events:
        rec = {"t": e.t}
        if e.mark is not None:
            rec["mark"] = e.mark
        if e.label is not None:
            rec["label"] = int(e.label)
        events.append(rec)
    return {
        "entry_id": seq.entry_id,
        "t_start": seq.t_start,
        "t_end": seq.t_end,
        "events": events,
    }


def record_to_sequence(record, default_id=None):
    if not isinstance(record, dict):
        raise FormatError(f"record {default_id!r} is not an object")
    entry_id = record.get("entry_id", default_id)
    entry_id = str(entry_id) if entry_id is not None else None
    for key in ("t_start", "t_end", "events"):
        if key not in record:
            raise FormatError(f"entry {entry_id!r}: missing field {key!r}")
    t_start = _number(record["t_start"], entry_id, "t_start")
    t_end = _number(record["t_end"], entry_id, "t_end")
    raw = record["events"]
    if not isinstance(raw, list):
        raise FormatError(f"entry {entry_id!r}: field 'events' must be an array")
    events = []
    for i, ev in enumerate(raw):
        if not isinstance(ev, dict) or "t" not in ev:
            raise FormatError(f"entry {entry_id!r}: events[{i}] needs a 't' field")
        t = _number(ev["t"], entry_id, f"events[{i}].t")
        mark = ev.get("mark")
        if mark is not None:
            mark = _number(mark, entry_id, f"events[{i}].mark")
        label = ev.get("label")
        if label is not None:
            if label not in (0, 1) or isinstance(label, float):
                raise FormatError(f"entry {entry_id!r}: events[{i}].label must be 0 or 1")
            label = bool(label)
        events.append(Event(t, mark, label))
    try:
        return EventSequence.from_events(t_start, t_end, events, entry_id=entry_id)
    except IntrusionError as exc:
        raise FormatError(f"entry {entry_id!r}: {exc}") from exc


def read_dataset(path):
    sequences = []
    with _open(path, "r") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise FormatError(f"line {lineno}: invalid JSON ({exc.msg})") from None
            sequences.append(record_to_sequence(record, default_id=str(lineno - 1)))
    return sequences


def _dump(obj):
    return json.dumps(obj, separators=(",", ":"), allow_nan=False)


def write_dataset(path, sequences):
    with _open(path, "w") as fh:
        for seq in sequences:
            fh.write(_dump(sequence_to_record(seq)) + "\n")


def score_record(seq, result):
    return {
        "entry_id": seq.entry_id,
        "intrusion_probability": float(result.intrusion_probability),
        "log_marginal": float(result.log_marginal),
        "map_indices": sorted(int(i) for i in result.map.intrusion_indices),
        "event_marginals": [float(x) for x in result.event_marginals],
    }


def write_scores(path, sequences, results):
    with _open(path, "w") as fh:
        for seq, result in zip(sequences, results):
            fh.write(_dump(score_record(seq, result)) + "\n")


def read_scores(path):
    with _open(path, "r") as fh:
        return [json.loads(line) for line in fh if line.strip()]


def write_params(path, interval_model, mark_model=None):
    payload = {
        "interval_model": interval_model.to_dict(),
        "mark_model": None if mark_model is None else mark_model.to_dict(),
    }
    with _open(path, "w") as fh:
        fh.write(json.dumps(payload, indent=2) + "\n")


def read_params(path):
    with _open(path, "r") as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"parameter file: invalid JSON ({exc.msg})") from None
    try:
        im = payload["interval_model"]
        model = IntervalModel(im["family"], im.get("shape", 1.0), im["rate"])
        mm = payload.get("mark_model")
        marks = None if mm is None else MarkModel(mm["mu"], mm["sigma"], mm.get("family", "lognormal"))
    except (KeyError, TypeError) as exc:
        raise FormatError(f"parameter file: missing or malformed field {exc}") from None
    return model, marks


def write_roc_csv(path, report):
    with _open(path, "w") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["level", "threshold", "fpr", "tpr"])
        for level, points in (("entry", report.roc_entry), ("event", report.roc_event)):
            for threshold, fpr, tpr in points:
                writer.writerow([level, repr(float(threshold)), repr(fpr), repr(tpr)])
