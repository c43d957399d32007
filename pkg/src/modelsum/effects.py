"""Partial dependence and accumulated local effects on held-out rows.

Both estimators work from one (rows x grid) output matrix per feature: the
model's output with the feature set to each grid value. PDP averages its
columns; ALE differences adjacent columns within each row's own interval.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

from modelsum.tabular import CATEGORICAL, NUMERIC, REGRESSION, Task

PDP = "pdp"
ALE = "ale"
AGGREGATE = "aggregate"
RESPONSE_CLASS = "response"

DEFAULT_GRID_SIZE = 20
MAX_EFFECT_ROWS = 10_000


class EffectError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class EffectGrid:
    feature: str
    kind: str
    values: np.ndarray  # numeric grid points, or level indices 0..L-1
    labels: tuple[str, ...] = ()
    degenerate: bool = False

    def __len__(self) -> int:
        return len(self.values)

    @property
    def is_categorical(self) -> bool:
        return self.kind == CATEGORICAL

    def same_as(self, other: "EffectGrid") -> bool:
        return (
            self.feature == other.feature
            and self.kind == other.kind
            and self.labels == other.labels
            and np.array_equal(self.values, other.values)
        )


@dataclass(eq=False)
class EffectCurve:
    feature: str
    method: str
    cls: str
    fold: int | str
    grid: EffectGrid
    values: np.ndarray
    counts: np.ndarray | None = None  # ALE: rows per grid point (interval upper end)
    sd: np.ndarray | None = None  # aggregate only
    flags: list[str] = field(default_factory=list)
    degenerate: bool = False
    n_folds: int = 1
    # ALE with empty intervals: the curve with those intervals bridged by the
    # all-row local effect; used only for the main-effect reconstruction
    bridged: np.ndarray | None = None


def build_grid(task: Task, feature: str, size: int = DEFAULT_GRID_SIZE) -> EffectGrid:
    """Grid over the full task data, shared by every fold.

    Numeric: ``size`` equidistant points over the observed range, or the
    sorted unique values when there are no more than ``size`` of them.
    """
    if feature not in task.feature_names:
        raise EffectError(f"{feature!r} is not a feature of the task")
    col = task.frame[feature]
    if col.is_categorical:
        return EffectGrid(feature, CATEGORICAL, np.arange(len(col.levels), dtype=np.float64), col.levels,
                          degenerate=len(col.levels) < 2)
    if size < 2:
        raise EffectError("grid size must be >= 2")
    unique = np.unique(col.values)
    if len(unique) == 1:
        return EffectGrid(feature, NUMERIC, unique.copy(), degenerate=True)
    if len(unique) <= size:
        return EffectGrid(feature, NUMERIC, unique.copy())
    lo, hi = float(unique[0]), float(unique[-1])
    values = np.unique(np.linspace(lo, hi, size))
    values[0], values[-1] = lo, hi
    return EffectGrid(feature, NUMERIC, values)


def effect_classes(task: Task) -> list[tuple[str, int]]:
    """(class label, output column) pairs whose effects are modeled."""
    if task.task_type == REGRESSION:
        return [(RESPONSE_CLASS, 0)]
    if task.positive_class is not None:
        return [(task.positive_class, task.positive_index)]
    return [(lvl, k) for k, lvl in enumerate(task.class_levels)]


@njit(cache=True)
def column_means(M):
    """Column means with rows summed strictly left to right."""
    n, G = M.shape
    acc = np.zeros(G)
    for i in range(n):
        for g in range(G):
            acc[g] += M[i, g]
    for g in range(G):
        acc[g] /= n
    return acc


def grid_outputs(model, X: np.ndarray, feature_index: int, grid: EffectGrid) -> np.ndarray:
    """Model outputs (rows x grid x outputs) with the feature set to each grid value."""
    return model.raw_grid(X, feature_index, grid.values)


def pdp_from_outputs(M: np.ndarray, grid: EffectGrid, cls: str, fold=0) -> EffectCurve:
    """``M``: (rows x grid) outputs of the modeled class."""
    values = column_means(np.ascontiguousarray(M))
    return EffectCurve(grid.feature, PDP, cls, fold, grid, values, degenerate=grid.degenerate)


def interval_index(grid: EffectGrid, x: np.ndarray) -> np.ndarray:
    """ALE cell per row: (g[k-1], g[k]] -> k, with rows at g[0] in cell 1.

    Categorical rows map to their own level index.
    """
    if grid.is_categorical:
        return np.asarray(x, dtype=np.int64)
    G = len(grid)
    return np.clip(np.searchsorted(grid.values, x, side="left"), 1, G - 1)


def ale_from_outputs(M: np.ndarray, x: np.ndarray, grid: EffectGrid, cls: str, fold=0) -> EffectCurve:
    """Centered ALE curve from (rows x grid) outputs and the rows' own feature values."""
    n, G = M.shape
    if G < 2 or n == 0:
        return EffectCurve(grid.feature, ALE, cls, fold, grid, np.zeros(G), np.array([n] * G if G else []),
                           degenerate=True, flags=["degenerate grid"] if G < 2 else ["no rows"])
    cell = interval_index(grid, x)
    rows = np.arange(n)
    local = np.zeros(G)
    counts = np.zeros(G, dtype=np.int64)
    np.add.at(counts, cell, 1)
    has_prev = cell >= 1
    diff = M[rows[has_prev], cell[has_prev]] - M[rows[has_prev], cell[has_prev] - 1]
    sums = np.zeros(G)
    np.add.at(sums, cell[has_prev], diff)
    flags = []
    for k in range(1, G):
        if counts[k]:
            local[k] = sums[k] / counts[k]
        else:
            flags.append(f"empty interval {k}")
    accumulated = np.cumsum(local)
    center = float(np.dot(counts, accumulated)) / n
    values = accumulated - center
    bridged = None
    if flags:
        empty = np.flatnonzero(counts[1:] == 0) + 1
        filled = local.copy()
        filled[empty] = (M[:, empty] - M[:, empty - 1]).mean(axis=0)
        bridged = np.cumsum(filled)
    return EffectCurve(grid.feature, ALE, cls, fold, grid, values, counts, flags=flags, bridged=bridged)


def _encode_rows(model, frame):
    return model.encoder.encode(frame)


def _feature_index(model, feature: str) -> int:
    try:
        return model.feature_names.index(feature)
    except ValueError:
        raise EffectError(f"model was not trained on {feature!r}") from None


def _class_column(model, cls: str | None) -> tuple[str, int]:
    if not model.is_classification:
        return RESPONSE_CLASS, 0
    if cls is None:
        cls = model.positive_class if model.positive_class is not None else model.class_levels[0]
    return cls, model.class_levels.index(cls)


def pdp(model, frame, grid: EffectGrid, cls: str | None = None, fold=0) -> EffectCurve:
    """Average output over ``frame`` rows with the feature set to each grid value."""
    if frame.n_rows == 0:
        raise EffectError("pdp needs at least one row")
    X = _encode_rows(model, frame)
    cls, k = _class_column(model, cls)
    M = grid_outputs(model, X, _feature_index(model, grid.feature), grid)[:, :, k]
    return pdp_from_outputs(M, grid, cls, fold)


def ale(model, frame, grid: EffectGrid, cls: str | None = None, fold=0) -> EffectCurve:
    X = _encode_rows(model, frame)
    cls, k = _class_column(model, cls)
    j = _feature_index(model, grid.feature)
    M = grid_outputs(model, X, j, grid)[:, :, k]
    return ale_from_outputs(M, X[:, j], grid, cls, fold)


def ale_row_values(curve: EffectCurve, x: np.ndarray) -> np.ndarray:
    """Main-effect contribution per row, re-centered to mean zero over the rows.

    Numeric features interpolate linearly between grid points, which makes
    the additive reconstruction exact for models linear in the feature.
    Empty intervals use the bridged curve so rows on either side of a gap
    stay consistent.
    """
    if curve.degenerate or len(curve.values) < 2:
        return np.zeros(len(x))
    values = curve.values if curve.bridged is None else curve.bridged
    if curve.grid.is_categorical:
        vals = values[np.asarray(x, dtype=np.int64)]
    else:
        vals = np.interp(x, curve.grid.values, values)
    return vals - vals.mean()


def aggregate_effects(curves: list[EffectCurve]) -> EffectCurve:
    """Pointwise mean (and sample sd) over fold curves; degenerate folds excluded."""
    if not curves:
        raise EffectError("no curves to aggregate")
    first = curves[0]
    for c in curves[1:]:
        if c.method != first.method or c.cls != first.cls or not c.grid.same_as(first.grid):
            raise EffectError("cannot aggregate curves with different grids, methods or classes")
    usable = [c for c in curves if not c.degenerate]
    flags = [f"fold {c.fold} degenerate, excluded" for c in curves if c.degenerate]
    if not usable:
        G = len(first.grid)
        return EffectCurve(first.feature, first.method, first.cls, AGGREGATE, first.grid, np.zeros(G),
                           sd=np.zeros(G), flags=flags, degenerate=True, n_folds=0)
    stack = np.vstack([c.values for c in usable])
    mean = stack.mean(axis=0)
    sd = stack.std(axis=0, ddof=1) if len(usable) > 1 else np.zeros(stack.shape[1])
    counts = None
    if first.counts is not None:
        counts = np.sum([c.counts for c in usable], axis=0)
    return EffectCurve(first.feature, first.method, first.cls, AGGREGATE, first.grid, mean, counts,
                       sd=sd, flags=flags, n_folds=len(usable))
