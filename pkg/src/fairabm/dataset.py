"""Tabular schema, leakage mask, CSV/JSON export and mini-batch streaming."""

from __future__ import annotations

import hashlib
import io
import json
import math
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Iterable, Iterator, Sequence

import numpy as np

from .config import ConfigError, Group
from .sim import DatasetRow

DATASET_SCHEMA = "fairabm.dataset/1"

FEATURES = (
    "wealth",
    "education",
    "trust",
    "fin_lit",
    "credit_score",
    "loan_hist",
    "loan_amount",
    "has_job",
    "has_car",
    "has_house",
)
DIAGNOSTICS = ("raw_score", "biased_score")
ID_COLUMNS = ("entity_id", "timestep", "group")
LABEL_COLUMNS = ("qualified", "loan_approved")
DEFAULT_HIDDEN = frozenset({"wealth", "credit_score", "education", "trust"})

_INT_COLUMNS = {"entity_id", "timestep", "education", "loan_hist"}
_BOOL_COLUMNS = {"has_job", "has_car", "has_house", "qualified", "loan_approved"}


class SchemaError(ValueError):
    pass


@dataclass(frozen=True)
class VisibilityMask:
    hidden: frozenset = DEFAULT_HIDDEN

    def __post_init__(self):
        object.__setattr__(self, "hidden", frozenset(self.hidden))
        unknown = self.hidden - set(FEATURES)
        if unknown:
            raise SchemaError(f"unknown feature(s) in mask: {sorted(unknown)}")
        if self.hidden >= set(FEATURES):
            raise SchemaError("mask hides every feature; nothing left to learn from")

    @property
    def visible(self) -> tuple[str, ...]:
        return tuple(f for f in FEATURES if f not in self.hidden)


DEFAULT_MASK = VisibilityMask()


def mask_features(row: DatasetRow, mask: VisibilityMask = DEFAULT_MASK) -> np.ndarray:
    """Model-visible features of one row, in schema order."""
    return np.array([float(getattr(row, f)) for f in mask.visible])


@dataclass(frozen=True)
class VisibleData:
    """Masked design matrix; the only input type the pipelines accept.

    ``groups`` is 0 for A and 1 for B and is consumed by mitigation only.
    """

    X: np.ndarray
    y: np.ndarray
    groups: np.ndarray
    feature_names: tuple[str, ...]

    def __len__(self) -> int:
        return len(self.y)

    def subset(self, idx) -> "VisibleData":
        return VisibleData(self.X[idx], self.y[idx], self.groups[idx], self.feature_names)


def group_code(g) -> int:
    return 0 if Group(g) is Group.A else 1


def to_visible(rows: Sequence[DatasetRow], mask: VisibilityMask = DEFAULT_MASK) -> VisibleData:
    names = mask.visible
    if rows:
        X = np.array([[float(getattr(r, f)) for f in names] for r in rows])
    else:
        X = np.empty((0, len(names)))
    y = np.array([r.label for r in rows], dtype=np.int64)
    g = np.array([group_code(r.group) for r in rows], dtype=np.int64)
    return VisibleData(X, y, g, names)


@dataclass(frozen=True)
class MiniBatch:
    rows: tuple
    start: int

    @property
    def size(self) -> int:
        return len(self.rows)


def stream_batches(rows: Sequence, batch_size: int = 100) -> Iterator[MiniBatch]:
    if batch_size < 1:
        raise ConfigError("batch_size must be >= 1")
    for start in range(0, len(rows), batch_size):
        yield MiniBatch(tuple(rows[start : start + batch_size]), start)


def _columns(include_diagnostics: bool) -> tuple[str, ...]:
    return ID_COLUMNS + FEATURES + LABEL_COLUMNS + (DIAGNOSTICS if include_diagnostics else ())


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "1" if v else "0"
    if isinstance(v, Group):
        return v.value
    if isinstance(v, float):
        return repr(v)
    return str(v)


def _parse(col: str, text: str):
    if col == "group":
        return Group(text)
    if col in _BOOL_COLUMNS:
        if text not in ("0", "1"):
            raise SchemaError(f"{col}: expected 0/1, got {text!r}")
        return text == "1"
    if col in _INT_COLUMNS:
        return int(text)
    return float(text)


def dumps_csv(rows: Iterable[DatasetRow], include_diagnostics: bool = True) -> str:
    cols = _columns(include_diagnostics)
    buf = io.StringIO()
    buf.write(f"# schema: {DATASET_SCHEMA}\n")
    buf.write(",".join(cols) + "\n")
    for r in rows:
        buf.write(",".join(_fmt(getattr(r, c)) for c in cols) + "\n")
    return buf.getvalue()


def loads_csv(text: str) -> list[DatasetRow]:
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or lines[0] != f"# schema: {DATASET_SCHEMA}":
        raise SchemaError(f"missing or unsupported schema line (expected {DATASET_SCHEMA})")
    header = tuple(lines[1].split(",")) if len(lines) > 1 else ()
    if header not in (_columns(True), _columns(False)):
        raise SchemaError(f"unexpected header {header}")
    rows = []
    for lineno, line in enumerate(lines[2:], start=3):
        cells = line.split(",")
        if len(cells) != len(header):
            raise SchemaError(f"line {lineno}: expected {len(header)} cells, got {len(cells)}")
        values = {c: _parse(c, v) for c, v in zip(header, cells)}
        for c in DIAGNOSTICS:
            values.setdefault(c, math.nan)
        rows.append(DatasetRow(**values))
    return rows


def export_csv(rows: Iterable[DatasetRow], path, include_diagnostics: bool = True) -> None:
    # newline="" keeps LF endings on every platform
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(dumps_csv(rows, include_diagnostics))


def import_csv(path) -> list[DatasetRow]:
    with open(path, encoding="utf-8", newline="") as fh:
        return loads_csv(fh.read())


def export_json(rows: Iterable[DatasetRow], path, include_diagnostics: bool = True) -> None:
    cols = _columns(include_diagnostics)
    records = []
    for r in rows:
        rec = {}
        for c in cols:
            v = getattr(r, c)
            rec[c] = v.value if isinstance(v, Group) else v
        records.append(rec)
    doc = {"schema": DATASET_SCHEMA, "columns": list(cols), "rows": records}
    Path(path).write_text(json.dumps(doc, indent=1) + "\n", encoding="utf-8")


def import_json(path) -> list[DatasetRow]:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    if doc.get("schema") != DATASET_SCHEMA:
        raise SchemaError(f"unsupported schema {doc.get('schema')!r}")
    out = []
    names = {f.name for f in fields(DatasetRow)}
    for rec in doc["rows"]:
        if set(rec) - names:
            raise SchemaError(f"unknown columns {sorted(set(rec) - names)}")
        rec = dict(rec)
        rec["group"] = Group(rec["group"])
        for c in DIAGNOSTICS:
            rec.setdefault(c, math.nan)
        out.append(DatasetRow(**rec))
    return out


def fingerprint(rows: Iterable[DatasetRow]) -> str:
    return hashlib.sha256(dumps_csv(rows).encode("utf-8")).hexdigest()
