"""CSV and JSON persistence: reward tables, measures, metrics, records, manifests.

File layouts (all with a header row):

    reward table     state,action,value
    reward set       reward,state,action,value
    measure          index,weight
    ground metric    row,col,value
    result records   kind,variable,seed,metric,value,converged,wall_ms

Floats are written with 17 significant digits, which round-trips doubles
exactly. Every file is written to a temporary sibling and renamed into place.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import io
import json
import os
import tempfile
from dataclasses import dataclass

import numpy as np

from .exceptions import InvalidArgumentError
from .lab import ResultRecord
from .ot.metric import GroundMetric
from .rewards import DEFAULT_BOUND, DiscreteMeasure, RewardTable

RECORD_HEADER = ("kind", "variable", "seed", "metric", "value", "converged", "wall_ms")
MANIFEST_NAME = "manifest.json"


def fmt(x):
    return "%.17g" % x


def atomic_write_text(path, text):
    """Write ``text`` to ``path`` through a temporary file and a rename."""
    directory = os.path.dirname(os.path.abspath(path))
    try:
        fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=os.path.basename(path))
    except OSError as exc:
        raise InvalidArgumentError(f"cannot write {path}: {exc.strerror}") from None
    try:
        with os.fdopen(fd, "w", newline="") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        os.unlink(tmp)
        raise InvalidArgumentError(f"cannot write {path}: {exc.strerror}") from None


def _csv_text(header, rows):
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def _read_rows(path, header):
    try:
        with open(path, newline="") as handle:
            rows = list(csv.reader(handle))
    except OSError as exc:
        raise InvalidArgumentError(f"cannot read {path}: {exc.strerror}") from None
    if not rows or tuple(h.strip() for h in rows[0]) != tuple(header):
        raise InvalidArgumentError(f"{path}: expected header {','.join(header)}")
    body = [r for r in rows[1:] if r]
    for lineno, row in enumerate(body, start=2):
        if len(row) != len(header):
            raise InvalidArgumentError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
    return body


def _parse(path, lineno, kind, text):
    try:
        return kind(text)
    except ValueError:
        raise InvalidArgumentError(f"{path}:{lineno}: cannot parse {text!r}") from None


def _dense(path, entries, shape_names):
    """Assemble ``{(i, j): value}`` into a complete dense matrix."""
    if not entries:
        raise InvalidArgumentError(f"{path}: no data rows")
    rows = max(i for i, _ in entries) + 1
    cols = max(j for _, j in entries) + 1
    if min(min(k) for k in entries) < 0:
        raise InvalidArgumentError(f"{path}: negative {shape_names} index")
    if len(entries) != rows * cols:
        raise InvalidArgumentError(f"{path}: expected every {shape_names} pair once ({rows}x{cols})")
    out = np.empty((rows, cols))
    for (i, j), v in entries.items():
        out[i, j] = v
    return out


def _collect(path, rows, columns):
    entries = {}
    for lineno, row in enumerate(rows, start=2):
        i = _parse(path, lineno, int, row[columns[0]])
        j = _parse(path, lineno, int, row[columns[1]])
        if (i, j) in entries:
            raise InvalidArgumentError(f"{path}:{lineno}: duplicate entry {(i, j)}")
        entries[(i, j)] = _parse(path, lineno, float, row[columns[2]])
    return entries


def reward_rows(reward):
    values = np.asarray(getattr(reward, "values", reward), dtype=float)
    return [(s, a, fmt(values[s, a])) for s in range(values.shape[0]) for a in range(values.shape[1])]


def write_reward_table(reward, path):
    atomic_write_text(path, _csv_text(("state", "action", "value"), reward_rows(reward)))


def read_reward_table(path, bound=DEFAULT_BOUND):
    rows = _read_rows(path, ("state", "action", "value"))
    return RewardTable(_dense(path, _collect(path, rows, (0, 1, 2)), "state-action"), bound)


def write_reward_set(rewards, path):
    rows = [(k,) + row for k, r in enumerate(rewards) for row in reward_rows(r)]
    atomic_write_text(path, _csv_text(("reward", "state", "action", "value"), rows))


def read_reward_set(path, bound=DEFAULT_BOUND):
    rows = _read_rows(path, ("reward", "state", "action", "value"))
    groups = {}
    for lineno, row in enumerate(rows, start=2):
        groups.setdefault(_parse(path, lineno, int, row[0]), []).append((lineno, row[1:]))
    if sorted(groups) != list(range(len(groups))):
        raise InvalidArgumentError(f"{path}: reward ids must be 0..k-1")
    tables = []
    for k in range(len(groups)):
        entries = {}
        for lineno, (s, a, v) in groups[k]:
            key = (_parse(path, lineno, int, s), _parse(path, lineno, int, a))
            if key in entries:
                raise InvalidArgumentError(f"{path}:{lineno}: duplicate entry {key}")
            entries[key] = _parse(path, lineno, float, v)
        tables.append(RewardTable(_dense(path, entries, "state-action"), bound))
    if len({t.values.shape for t in tables}) > 1:
        raise InvalidArgumentError(f"{path}: reward tables have different shapes")
    return tables


def write_measure(measure, path):
    weights = getattr(measure, "weights", measure)
    atomic_write_text(path, _csv_text(("index", "weight"), [(i, fmt(w)) for i, w in enumerate(weights)]))


def read_measure(path):
    rows = _read_rows(path, ("index", "weight"))
    weights = {}
    for lineno, row in enumerate(rows, start=2):
        i = _parse(path, lineno, int, row[0])
        if i in weights:
            raise InvalidArgumentError(f"{path}:{lineno}: duplicate index {i}")
        weights[i] = _parse(path, lineno, float, row[1])
    if sorted(weights) != list(range(len(weights))):
        raise InvalidArgumentError(f"{path}: indices must be 0..n-1")
    return DiscreteMeasure(np.array([weights[i] for i in range(len(weights))]))


def write_matrix(matrix, path):
    m = np.asarray(getattr(matrix, "costs", matrix), dtype=float)
    rows = [(i, j, fmt(m[i, j])) for i in range(m.shape[0]) for j in range(m.shape[1])]
    atomic_write_text(path, _csv_text(("row", "col", "value"), rows))


def read_matrix(path):
    return _dense(path, _collect(path, _read_rows(path, ("row", "col", "value")), (0, 1, 2)), "row-col")


def read_metric(path):
    return GroundMetric(read_matrix(path))


def records_text(records):
    rows = [(r.kind, fmt(r.variable), r.seed, r.metric, fmt(r.value),
             "true" if r.converged else "false", fmt(r.wall_ms)) for r in records]
    return _csv_text(RECORD_HEADER, rows)


def write_records(records, path):
    """Write records as CSV; they must already be in canonical order."""
    keys = [r.sort_key() for r in records]
    if keys != sorted(keys):
        raise InvalidArgumentError("records must be sorted by (kind, variable, seed, metric)")
    atomic_write_text(path, records_text(records))


def read_records(path):
    out = []
    for lineno, row in enumerate(_read_rows(path, RECORD_HEADER), start=2):
        if row[5] not in ("true", "false"):
            raise InvalidArgumentError(f"{path}:{lineno}: converged must be true or false")
        out.append(ResultRecord(row[0], _parse(path, lineno, float, row[1]),
                                _parse(path, lineno, int, row[2]), row[3],
                                _parse(path, lineno, float, row[4]), row[5] == "true",
                                _parse(path, lineno, float, row[6])))
    return out


def records_digest(path):
    """SHA-256 of a records file with the wall_ms column removed."""
    try:
        with open(path, newline="") as handle:
            lines = handle.read().split("\n")
    except OSError as exc:
        raise InvalidArgumentError(f"cannot read {path}: {exc.strerror}") from None
    digest = hashlib.sha256()
    for line in lines:
        digest.update((line.rsplit(",", 1)[0] if line else line).encode() + b"\n")
    return digest.hexdigest()


@dataclass(frozen=True)
class RunManifest:
    """What a run used and what it wrote; enough to replay and verify it."""

    config: dict
    master_seed: int
    version: str
    started: str
    finished: str
    digests: dict

    def to_json(self):
        return json.dumps(dataclasses.asdict(self), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text):
        data = json.loads(text)
        return cls(**{f.name: data[f.name] for f in dataclasses.fields(cls)})


def write_manifest(manifest, out_dir):
    atomic_write_text(os.path.join(out_dir, MANIFEST_NAME), manifest.to_json())


def read_manifest(out_dir):
    path = os.path.join(out_dir, MANIFEST_NAME)
    try:
        with open(path) as handle:
            return RunManifest.from_json(handle.read())
    except OSError as exc:
        raise InvalidArgumentError(f"cannot read {path}: {exc.strerror}") from None
    except (ValueError, KeyError, TypeError) as exc:
        raise InvalidArgumentError(f"{path}: malformed manifest ({exc})") from None


def verify_manifest(out_dir):
    """Names of record files whose digest no longer matches the manifest."""
    manifest = read_manifest(out_dir)
    return sorted(name for name, digest in manifest.digests.items()
                  if not os.path.exists(os.path.join(out_dir, name))
                  or records_digest(os.path.join(out_dir, name)) != digest)


def read_json(path):
    try:
        with open(path) as handle:
            return json.load(handle)
    except OSError as exc:
        raise InvalidArgumentError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InvalidArgumentError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None
