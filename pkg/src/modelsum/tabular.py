"""Typed tabular data, CSV ingestion and task definition."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

NUMERIC = "numeric"
CATEGORICAL = "categorical"

REGRESSION = "regression"
BINARY = "binary_classification"
MULTICLASS = "multiclass_classification"

MISSING_TOKENS = ("", "NA")


class DataError(ValueError):
    """Raised for malformed data files or inconsistent task definitions."""


@dataclass(frozen=True, eq=False)
class Column:
    """One typed column.

    Numeric columns hold float64 values; categorical columns hold int64
    indices into ``levels`` (order is meaningful).
    """

    name: str
    kind: str
    values: np.ndarray
    levels: tuple[str, ...] = ()

    def __post_init__(self):
        if self.kind == NUMERIC:
            values = np.asarray(self.values, dtype=np.float64)
        elif self.kind == CATEGORICAL:
            values = np.asarray(self.values, dtype=np.int64)
            if values.size and (values.min() < 0 or values.max() >= len(self.levels)):
                raise DataError(f"level index out of range in column {self.name!r}")
        else:
            raise DataError(f"unknown column kind {self.kind!r}")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "levels", tuple(self.levels))

    @classmethod
    def numeric(cls, name: str, values: Iterable[float]) -> "Column":
        if not isinstance(values, np.ndarray):
            values = list(values)
        return cls(name, NUMERIC, np.asarray(values, dtype=np.float64))

    @classmethod
    def categorical(cls, name: str, values: Sequence[str], levels: Sequence[str] | None = None) -> "Column":
        """Encode string values; level order is first appearance unless declared."""
        if levels is None:
            levels = list(dict.fromkeys(values))
        lookup = {lvl: i for i, lvl in enumerate(levels)}
        try:
            codes = np.array([lookup[v] for v in values], dtype=np.int64)
        except KeyError as exc:
            raise DataError(f"value {exc.args[0]!r} not among declared levels of {name!r}") from None
        return cls(name, CATEGORICAL, codes, tuple(levels))

    @property
    def is_categorical(self) -> bool:
        return self.kind == CATEGORICAL

    def __len__(self) -> int:
        return len(self.values)

    def decoded(self) -> list:
        if self.is_categorical:
            return [self.levels[i] for i in self.values]
        return self.values.tolist()

    def take(self, rows) -> "Column":
        return Column(self.name, self.kind, self.values[rows], self.levels)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Column):
            return NotImplemented
        return (
            self.name == other.name
            and self.kind == other.kind
            and self.levels == other.levels
            and np.array_equal(self.values, other.values)
        )


@dataclass(frozen=True, eq=False)
class Frame:
    columns: tuple[Column, ...]

    def __post_init__(self):
        columns = tuple(self.columns)
        object.__setattr__(self, "columns", columns)
        names = [c.name for c in columns]
        if len(set(names)) != len(names):
            raise DataError("column names must be unique")
        lengths = {len(c) for c in columns}
        if len(lengths) > 1:
            raise DataError("all columns must have the same number of rows")

    @property
    def n_rows(self) -> int:
        return len(self.columns[0]) if self.columns else 0

    @property
    def names(self) -> list[str]:
        return [c.name for c in self.columns]

    def __contains__(self, name: str) -> bool:
        return any(c.name == name for c in self.columns)

    def __getitem__(self, name: str) -> Column:
        for c in self.columns:
            if c.name == name:
                return c
        raise KeyError(name)

    def take(self, rows) -> "Frame":
        rows = np.asarray(rows)
        return Frame(tuple(c.take(rows) for c in self.columns))

    def replace(self, column: Column) -> "Frame":
        return Frame(tuple(column if c.name == column.name else c for c in self.columns))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Frame):
            return NotImplemented
        return len(self.columns) == len(other.columns) and all(
            a == b for a, b in zip(self.columns, other.columns)
        )


def _parse_float(token: str) -> float | None:
    try:
        value = float(token)
    except ValueError:
        return None
    # reject "nan"/"inf" spellings; they are not decimal numbers
    return value if np.isfinite(value) else None


def load_csv(path, schema_overrides: Mapping[str, str] | None = None) -> Frame:
    """Read a header-first, RFC-4180 CSV file into a Frame.

    A column is numeric iff every field parses as a float; ``schema_overrides``
    forces a kind per column name. Missing tokens ("" and "NA") are rejected.
    """
    overrides = dict(schema_overrides or {})
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    if not rows or not rows[0]:
        raise DataError(f"{path}: empty file")
    header, body = rows[0], rows[1:]
    if len(set(header)) != len(header):
        dupes = sorted({h for h in header if header.count(h) > 1})
        raise DataError(f"{path}: duplicate header names {dupes}")
    unknown = set(overrides) - set(header)
    if unknown:
        raise DataError(f"schema override for unknown column(s) {sorted(unknown)}")
    if not body:
        raise DataError(f"{path}: no data rows")
    for r, row in enumerate(body, start=1):
        if len(row) != len(header):
            raise DataError(f"row {r} has {len(row)} fields, expected {len(header)}")

    columns = []
    for j, name in enumerate(header):
        tokens = [row[j] for row in body]
        for r, tok in enumerate(tokens, start=1):
            if tok in MISSING_TOKENS:
                raise DataError(f"missing value at row {r}, column {name}")
        kind = overrides.get(name)
        if kind not in (None, NUMERIC, CATEGORICAL):
            raise DataError(f"unknown kind {kind!r} for column {name}")
        parsed = [_parse_float(t) for t in tokens]
        if kind == NUMERIC:
            for r, value in enumerate(parsed, start=1):
                if value is None:
                    raise DataError(f"unparseable numeric at row {r}, column {name}")
        if kind is None:
            kind = NUMERIC if all(v is not None for v in parsed) else CATEGORICAL
        if kind == NUMERIC:
            columns.append(Column(name, NUMERIC, np.array(parsed, dtype=np.float64)))
        else:
            columns.append(Column.categorical(name, tokens))
    return Frame(tuple(columns))


def write_csv(frame: Frame, path) -> None:
    """Write a Frame so that ``load_csv`` reproduces it.

    Floats use ``repr`` (round-trip exact). Level order survives only if it
    equals first-appearance order; pass overrides/levels otherwise.
    """
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(frame.names)
        decoded = [
            c.decoded() if c.is_categorical else [repr(float(v)) for v in c.values]
            for c in frame.columns
        ]
        for row in zip(*decoded):
            writer.writerow(row)


@dataclass(frozen=True, eq=False)
class Task:
    frame: Frame
    target: str
    task_type: str
    feature_names: tuple[str, ...]
    positive_class: str | None = None
    protected_attribute: str | None = None
    protected_is_feature: bool = False
    id: str = "task"

    @property
    def target_column(self) -> Column:
        return self.frame[self.target]

    @property
    def class_levels(self) -> tuple[str, ...]:
        return self.target_column.levels

    @property
    def is_classification(self) -> bool:
        return self.task_type != REGRESSION

    @property
    def positive_index(self) -> int | None:
        if self.positive_class is None:
            return None
        return self.class_levels.index(self.positive_class)

    @property
    def n_rows(self) -> int:
        return self.frame.n_rows

    def features(self) -> list[Column]:
        return [self.frame[n] for n in self.feature_names]

    def describe(self) -> dict:
        kinds = [self.frame[n].kind for n in self.feature_names]
        return {
            "id": self.id,
            "task_type": self.task_type,
            "target": self.target,
            "positive_class": self.positive_class,
            "n": self.n_rows,
            "p": len(self.feature_names),
            "n_numeric": kinds.count(NUMERIC),
            "n_categorical": kinds.count(CATEGORICAL),
        }


def make_task(
    frame: Frame,
    target: str,
    positive_class: str | None = None,
    protected_attribute: str | None = None,
    keep_protected_as_feature: bool = False,
    id: str = "task",
) -> Task:
    """Build a Task; the task type follows from the target column."""
    if target not in frame:
        raise DataError(f"target {target!r} not in frame")
    col = frame[target]
    if col.is_categorical:
        n_levels = len(col.levels)
        if len(np.unique(col.values)) < 2:
            raise DataError(f"target {target!r} is constant")
        if n_levels == 2:
            task_type = BINARY
            if positive_class is None:
                positive_class = col.levels[0]
            elif positive_class not in col.levels:
                raise DataError(f"positive class {positive_class!r} not a level of {target!r}")
        else:
            task_type = MULTICLASS
            if positive_class is not None:
                raise DataError("positive_class is only meaningful for binary targets")
    else:
        if positive_class is not None:
            raise DataError("positive_class given for a numeric target")
        if np.ptp(col.values) == 0:
            raise DataError(f"target {target!r} has zero variance")
        task_type = REGRESSION

    if protected_attribute is not None:
        if protected_attribute not in frame:
            raise DataError(f"protected attribute {protected_attribute!r} not in frame")
        if protected_attribute == target:
            raise DataError("protected attribute cannot be the target")
        pcol = frame[protected_attribute]
        if not pcol.is_categorical or len(pcol.levels) < 2:
            raise DataError("protected attribute must be categorical with at least 2 levels")

    features = tuple(
        n for n in frame.names
        if n != target and (n != protected_attribute or keep_protected_as_feature)
    )
    if not features:
        raise DataError("task has no features")
    return Task(
        frame=frame,
        target=target,
        task_type=task_type,
        feature_names=features,
        positive_class=positive_class,
        protected_attribute=protected_attribute,
        protected_is_feature=protected_attribute is not None and keep_protected_as_feature,
        id=id,
    )
