"""Config, instance, prediction, and result file formats."""
from __future__ import annotations

import csv
import io
from pathlib import Path

from .experiment import ExperimentConfig, IngestedModel
from .metrics import LabelSet
from .schedule import Job, SchedulingInstance
from .seeding import SeedSpec

INSTANCE_HEADER = ["job_id", "duration", "actual_type"]
WEIGHTS_HEADER = ["type", "weight"]
PREDICTIONS_HEADER = ["instance_id", "actual_label", "predicted_label"]

CONFIG_KEYS = {
    "labels",
    "counts",
    "positive",
    "test_size",
    "repetitions",
    "weight_range",
    "duration_range",
    "seed",
    "stride",
    "sample",
    "max_cells",
}


class FormatError(ValueError):
    """Malformed input file; the message names the file and line."""


def format_value(v) -> str:
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return format(v, ".6g")
    return str(v)


def write_csv(columns, rows, dest) -> None:
    """Rows as CSV with floats at 6 significant digits. ``dest`` is a path or a text stream."""
    def emit(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([format_value(row[c]) for c in columns])

    if isinstance(dest, (str, Path)):
        with open(dest, "w", newline="") as fh:
            emit(fh)
    else:
        emit(dest)


def _split(value: str) -> list:
    return [v.strip() for v in value.split(",") if v.strip()]


def _parse_range(value, where):
    parts = _split(value)
    if len(parts) != 2:
        raise FormatError(f"{where}: expected 'low,high', got {value!r}")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError:
        raise FormatError(f"{where}: non-numeric range {value!r}") from None


def parse_config(text: str, source: str = "<config>") -> ExperimentConfig:
    """Flat ``key = value`` lines; ``#`` starts a comment; unknown keys are errors."""
    raw = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise FormatError(f"{source}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in CONFIG_KEYS:
            raise FormatError(f"{source}:{lineno}: unknown key {key!r}")
        if key in raw:
            raise FormatError(f"{source}:{lineno}: duplicate key {key!r}")
        raw[key] = (value, f"{source}:{lineno}")

    for required in ("labels", "counts"):
        if required not in raw:
            raise FormatError(f"{source}: missing required key {required!r}")

    def get_int(key, default=None):
        if key not in raw or raw[key][0] == "":
            return default
        value, where = raw[key]
        try:
            return int(value)
        except ValueError:
            raise FormatError(f"{where}: {key} must be an integer, got {value!r}") from None

    labels = _split(raw["labels"][0])
    try:
        counts = [int(c) for c in _split(raw["counts"][0])]
    except ValueError:
        raise FormatError(f"{raw['counts'][1]}: counts must be integers") from None
    positive = 0
    if "positive" in raw:
        value, where = raw["positive"]
        if value not in labels:
            raise FormatError(f"{where}: positive label {value!r} is not among {labels}")
        positive = labels.index(value)
    kwargs = {}
    for key in ("weight_range", "duration_range"):
        if key in raw:
            kwargs[key] = _parse_range(*raw[key])
    try:
        return ExperimentConfig(
            label_set=LabelSet(tuple(labels), tuple(counts), positive),
            test_size=get_int("test_size"),
            repetitions=get_int("repetitions", 100),
            seed=SeedSpec(get_int("seed", 0)),
            stride=get_int("stride", 1),
            sample=get_int("sample"),
            max_cells=get_int("max_cells"),
            **kwargs,
        )
    except ValueError as exc:
        if isinstance(exc, FormatError):
            raise
        raise FormatError(f"{source}: {exc}") from None


def read_config(path) -> ExperimentConfig:
    return parse_config(Path(path).read_text(), str(path))


def dump_config(config: ExperimentConfig) -> str:
    ls = config.label_set
    lines = [
        f"labels = {','.join(map(str, ls.labels))}",
        f"counts = {','.join(map(str, ls.counts))}",
        f"positive = {ls.labels[ls.positive]}",
        f"repetitions = {config.repetitions}",
        f"weight_range = {config.weight_range[0]!r},{config.weight_range[1]!r}",
        f"duration_range = {config.duration_range[0]!r},{config.duration_range[1]!r}",
        f"seed = {config.seed.base_seed}",
        f"stride = {config.stride}",
    ]
    if config.sample is not None:
        lines.append(f"sample = {config.sample}")
    if config.max_cells is not None:
        lines.append(f"max_cells = {config.max_cells}")
    return "\n".join(lines) + "\n"


def _read_rows(path, header):
    """Yield (line number, row) after checking the header."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            first = next(reader)
        except StopIteration:
            raise FormatError(f"{path}: empty file") from None
        if [h.strip() for h in first] != header:
            raise FormatError(f"{path}:1: expected header {','.join(header)}, got {','.join(first)}")
        for row in reader:
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise FormatError(f"{path}:{reader.line_num}: expected {len(header)} fields, got {len(row)}")
            yield reader.line_num, [c.strip() for c in row]


def read_instance(instance_path, weights_path) -> SchedulingInstance:
    weights = {}
    for lineno, (t, w) in _read_rows(weights_path, WEIGHTS_HEADER):
        if t in weights:
            raise FormatError(f"{weights_path}:{lineno}: duplicate type {t!r}")
        try:
            weights[t] = float(w)
        except ValueError:
            raise FormatError(f"{weights_path}:{lineno}: weight {w!r} is not a number") from None
    jobs = []
    for lineno, (jid, dur, t) in _read_rows(instance_path, INSTANCE_HEADER):
        try:
            jobs.append(Job(int(jid), float(dur), t))
        except ValueError:
            raise FormatError(f"{instance_path}:{lineno}: bad job id or duration in {jid!r},{dur!r}") from None
        if t not in weights:
            raise FormatError(f"{instance_path}:{lineno}: type {t!r} has no weight in {weights_path}")
    try:
        return SchedulingInstance(tuple(jobs), weights)
    except ValueError as exc:
        raise FormatError(f"{instance_path}: {exc}") from None


def write_instance(instance: SchedulingInstance, instance_path, weights_path) -> None:
    write_csv(
        INSTANCE_HEADER,
        [{"job_id": j.job_id, "duration": repr(j.duration), "actual_type": j.actual_type} for j in instance.jobs],
        instance_path,
    )
    write_csv(
        WEIGHTS_HEADER,
        [{"type": t, "weight": repr(w)} for t, w in instance.type_weights.items()],
        weights_path,
    )


def read_predictions(path, instance: SchedulingInstance, name: str | None = None) -> IngestedModel:
    """Predictions aligned to the instance's jobs via instance_id = job_id."""
    by_id = {}
    types = {j.job_id: j.actual_type for j in instance.jobs}
    for lineno, (iid, actual, predicted) in _read_rows(path, PREDICTIONS_HEADER):
        try:
            key = int(iid)
        except ValueError:
            raise FormatError(f"{path}:{lineno}: instance_id {iid!r} is not an integer") from None
        if key not in types:
            raise FormatError(f"{path}:{lineno}: instance_id {key} is not a job of the instance")
        if key in by_id:
            raise FormatError(f"{path}:{lineno}: duplicate instance_id {key}")
        if actual != types[key]:
            raise FormatError(f"{path}:{lineno}: actual label {actual!r} differs from job type {types[key]!r}")
        if predicted not in instance.type_weights:
            raise FormatError(f"{path}:{lineno}: predicted label {predicted!r} has no weight")
        by_id[key] = (actual, predicted)
    missing = sorted(set(types) - set(by_id))
    if missing:
        raise FormatError(f"{path}: no prediction for job(s) {missing[:5]}")
    order = [j.job_id for j in instance.jobs]
    return IngestedModel(
        name or Path(path).stem,
        tuple(by_id[i][0] for i in order),
        tuple(by_id[i][1] for i in order),
    )


def write_predictions(rows, dest) -> None:
    """``rows`` are (instance_id, actual, predicted) triples."""
    write_csv(
        PREDICTIONS_HEADER,
        [dict(zip(PREDICTIONS_HEADER, r)) for r in rows],
        dest,
    )


def read_results(path) -> list[dict]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise FormatError(f"{path}: empty file")
        needed = {"matrix_id", "actual_tpr_macro", "actual_fpr_macro", "sim_tpr_mean", "sim_fpr_mean", "gap_mean"}
        lacking = needed - set(reader.fieldnames)
        if lacking:
            raise FormatError(f"{path}:1: missing column(s) {sorted(lacking)}")
        rows = []
        for row in reader:
            try:
                rows.append({k: (v if k == "matrix" else float(v)) for k, v in row.items()})
            except (TypeError, ValueError):
                raise FormatError(f"{path}:{reader.line_num}: non-numeric field") from None
    return rows


def to_text(columns, rows) -> str:
    buf = io.StringIO()
    write_csv(columns, rows, buf)
    return buf.getvalue()
