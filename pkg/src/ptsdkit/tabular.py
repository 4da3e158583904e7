"""Dataset model for categorical survey tables plus CSV ingestion/validation.

Cells are plain strings; a missing cell is the ``MISSING`` sentinel (None).
All feature columns are categorical text, including age: the survey encodes
age as a categorical answer, so no binning step exists. The single target
column is binary and its rows are never imputed.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, MissingColumn, RaggedRow, TargetMissingEntries
from .serialize import atomic_write_text

MISSING = None

KIND_CATEGORICAL = "categorical"
KIND_TARGET = "target"

#: Cell values treated as missing when reading a CSV. Configurable per load.
DEFAULT_MISSING_TOKENS = ("", "NA", "N/A")

#: The canonical seven survey features plus the binary PTSD target.
DEFAULT_SCHEMA_COLUMNS = (
    "Age",
    "Current Occupation",
    "Type of Disaster Faced",
    "Access to Safe Shelter Post-Disaster",
    "Observed Mental Health Issues Post-Disaster",
    "Mental or Physical Issues from Mental Distress",
    "Safety During the Disaster",
)
DEFAULT_TARGET_COLUMN = "PTSD"


@dataclass(frozen=True)
class ColumnSchema:
    """One column declaration: a trimmed name and its kind."""

    name: str
    kind: str = KIND_CATEGORICAL
    allow_missing: bool = True
    positive_category: str | None = None  # target columns only; default: lexicographically larger

    def __post_init__(self):
        object.__setattr__(self, "name", self.name.strip())
        if self.kind not in (KIND_CATEGORICAL, KIND_TARGET):
            raise DataError(f"unknown column kind {self.kind!r} for {self.name!r}")


@dataclass(frozen=True)
class Schema:
    """Ordered column schemas; exactly one target, unique trimmed names."""

    columns: tuple[ColumnSchema, ...]

    def __post_init__(self):
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            raise DataError("column names are not unique after whitespace trimming")
        targets = [c for c in self.columns if c.kind == KIND_TARGET]
        if len(targets) != 1:
            raise DataError(f"schema must declare exactly one target column, got {len(targets)}")

    @property
    def target(self) -> ColumnSchema:
        return next(c for c in self.columns if c.kind == KIND_TARGET)

    @property
    def feature_names(self) -> list[str]:
        return [c.name for c in self.columns if c.kind == KIND_CATEGORICAL]

    @property
    def names(self) -> list[str]:
        return [c.name for c in self.columns]

    @classmethod
    def from_json(cls, path) -> "Schema":
        try:
            with open(path, encoding="utf-8") as fh:
                doc = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise DataError(f"cannot read schema file {path}: {exc}") from exc
        cols = []
        for entry in doc.get("columns", []):
            cols.append(ColumnSchema(
                name=entry["name"],
                kind=entry.get("kind", KIND_CATEGORICAL),
                allow_missing=entry.get("allow_missing", True),
                positive_category=entry.get("positive_category"),
            ))
        return cls(tuple(cols))

    def to_json_dict(self) -> dict:
        cols = []
        for c in self.columns:
            entry = {"name": c.name, "kind": c.kind, "allow_missing": c.allow_missing}
            if c.positive_category is not None:
                entry["positive_category"] = c.positive_category
            cols.append(entry)
        return {"columns": cols}


def default_schema() -> Schema:
    cols = [ColumnSchema(n) for n in DEFAULT_SCHEMA_COLUMNS]
    cols.append(ColumnSchema(DEFAULT_TARGET_COLUMN, kind=KIND_TARGET))
    return Schema(tuple(cols))


@dataclass
class Table:
    """Column-oriented table. ``columns[name]`` is a list of str-or-MISSING cells."""

    schema: Schema
    columns: dict[str, list]
    n_rows: int = field(init=False)

    def __post_init__(self):
        lengths = {len(v) for v in self.columns.values()}
        if len(lengths) > 1:
            raise DataError(f"columns have differing lengths: {sorted(lengths)}")
        self.n_rows = lengths.pop() if lengths else 0
        for name in self.schema.names:
            if name not in self.columns:
                raise MissingColumn(name)

    def column(self, name: str) -> list:
        return self.columns[name]

    def row(self, i: int) -> list:
        return [self.columns[n][i] for n in self.schema.names]

    def target_categories(self) -> list[str]:
        """The distinct non-missing target cells, lexicographically sorted."""
        cells = {c for c in self.columns[self.schema.target.name] if c is not MISSING}
        return sorted(cells)

    def target_labels(self) -> np.ndarray:
        """Binary labels for the target column; 1 means the positive class.

        The positive class is the schema's positive_category when declared,
        else the lexicographically larger of the two observed categories
        (matching label-encoder code order, so e.g. "Yes" > "No" -> 1).
        """
        tcol = self.schema.target
        cells = self.columns[tcol.name]
        if any(c is MISSING for c in cells):
            raise TargetMissingEntries(sum(1 for c in cells if c is MISSING))
        cats = self.target_categories()
        if len(cats) > 2:
            raise DataError(f"target column has {len(cats)} categories, expected 2: {cats}")
        if tcol.positive_category is not None:
            positive = tcol.positive_category
            if positive not in cats:
                raise DataError(f"declared positive category {positive!r} absent from target")
        else:
            positive = cats[-1]
        return np.array([1 if c == positive else 0 for c in cells], dtype=np.int64)

    def take_rows(self, indices) -> "Table":
        cols = {n: [v[i] for i in indices] for n, v in self.columns.items()}
        return Table(self.schema, cols)


@dataclass
class ValidationReport:
    missing_counts: dict[str, int]
    distinct_counts: dict[str, int]
    target_class_counts: dict[str, int]
    n_rows: int

    def to_dict(self) -> dict:
        return {
            "n_rows": self.n_rows,
            "missing_counts": self.missing_counts,
            "distinct_counts": self.distinct_counts,
            "target_class_counts": self.target_class_counts,
        }


def load_csv(path, schema: Schema, missing_tokens=DEFAULT_MISSING_TOKENS) -> Table:
    """Read a UTF-8, RFC 4180 CSV into a Table.

    Header names are whitespace-trimmed before matching against the schema;
    columns absent from the schema are ignored. Cells equal to one of
    ``missing_tokens`` become MISSING. Row count is preserved exactly.
    """
    tokens = set(missing_tokens)
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise DataError(f"cannot open dataset {path}: {exc}") from exc
    with fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file, no header row")
        trimmed = [h.strip() for h in header]
        positions = {}
        for name in schema.names:
            if name not in trimmed:
                raise MissingColumn(name)
            positions[name] = trimmed.index(name)
        arity = len(header)
        columns = {name: [] for name in schema.names}
        for lineno, row in enumerate(reader, start=2):
            if len(row) != arity:
                raise RaggedRow(lineno)
            for name, pos in positions.items():
                cell = row[pos]
                columns[name].append(MISSING if cell in tokens else cell)
    return Table(schema, columns)


def write_csv(table: Table, path) -> None:
    """Write a Table back to CSV (atomically); MISSING cells become the empty string."""
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(table.schema.names)
    for i in range(table.n_rows):
        writer.writerow(["" if c is MISSING else c for c in table.row(i)])
    atomic_write_text(path, buf.getvalue())


def validate(table: Table) -> ValidationReport:
    """Per-column missing/distinct counts plus target class counts.

    Raises TargetMissingEntries when the target column carries MISSING cells:
    labels are never imputed. Use drop_missing_target first if the dataset
    legitimately contains unlabeled rows.
    """
    missing = {}
    distinct = {}
    for name in table.schema.names:
        cells = table.column(name)
        missing[name] = sum(1 for c in cells if c is MISSING)
        distinct[name] = len({c for c in cells if c is not MISSING})
    tname = table.schema.target.name
    if missing[tname] > 0:
        raise TargetMissingEntries(missing[tname])
    counts = {}
    for c in table.column(tname):
        counts[c] = counts.get(c, 0) + 1
    return ValidationReport(missing, distinct, dict(sorted(counts.items())), table.n_rows)


def drop_missing_target(table: Table) -> tuple[Table, int]:
    """Drop rows whose target cell is MISSING; the only row-dropping step."""
    tcells = table.column(table.schema.target.name)
    keep = [i for i, c in enumerate(tcells) if c is not MISSING]
    dropped = table.n_rows - len(keep)
    if dropped == 0:
        return table, 0
    return table.take_rows(keep), dropped
