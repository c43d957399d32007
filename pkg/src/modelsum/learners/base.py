from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Any

import numpy as np

from modelsum.tabular import CATEGORICAL, REGRESSION, Column, DataError, Frame, Task

RESPONSE = "response"
PROBABILITY = "probability"


class FitError(RuntimeError):
    """A learner could not be trained on the given rows."""


class FitWarning(UserWarning):
    pass


@dataclass(frozen=True)
class Learner:
    """A learner configuration: algorithm id, predict type and hyperparameters.

    ``params`` holds only explicitly set values; defaults live on the
    algorithm class so non-default settings can be listed.
    """

    id: str
    params: tuple[tuple[str, Any], ...] = ()
    predict_type: str | None = None

    @property
    def algorithm(self):
        from modelsum.learners import REGISTRY

        return REGISTRY[self.id]

    @property
    def task_types(self) -> tuple[str, ...]:
        return self.algorithm.task_types

    def hyperparameters(self) -> dict[str, Any]:
        values = dict(self.algorithm.defaults)
        values.update(self.params)
        return values

    def effective_predict_type(self, task: Task) -> str:
        if self.predict_type is not None:
            return self.predict_type
        return PROBABILITY if task.is_classification else RESPONSE

    def fit(self, task: Task, row_indices=None, seed: int = 0) -> "FittedModel":
        return fit(self, task, row_indices, seed)


def hyperparameter_summary(learner: Learner) -> list[tuple[str, Any]]:
    """Non-default hyperparameters in declaration order."""
    defaults = learner.algorithm.defaults
    current = dict(learner.params)
    return [
        (name, current[name])
        for name in defaults
        if name in current and current[name] != defaults[name]
    ]


@dataclass(frozen=True)
class Prediction:
    """Held-out predictions for a set of rows.

    Classification carries a probability matrix (rows sum to one) and/or hard
    labels as level indices; regression carries ``response``.
    """

    row_ids: np.ndarray
    task_type: str
    response: np.ndarray | None = None
    prob: np.ndarray | None = None
    labels: np.ndarray | None = None
    class_levels: tuple[str, ...] = ()

    def __len__(self) -> int:
        return len(self.row_ids)

    @property
    def is_classification(self) -> bool:
        return self.task_type != REGRESSION

    @property
    def predict_type(self) -> str:
        if not self.is_classification:
            return RESPONSE
        return PROBABILITY if self.prob is not None else RESPONSE


def hard_labels(prob: np.ndarray) -> np.ndarray:
    """Argmax per row; ties resolve to the lowest level index."""
    return np.argmax(prob, axis=1).astype(np.int64)


class FeatureEncoder:
    """Maps a Frame to the float matrix used by the fitted kernels.

    Numeric columns are copied; categorical columns become level indices
    relative to the fit-time level list.
    """

    def __init__(self, columns: list[Column]):
        self.names = tuple(c.name for c in columns)
        self.kinds = tuple(c.kind for c in columns)
        self.levels = tuple(c.levels for c in columns)

    @property
    def is_categorical(self) -> np.ndarray:
        return np.array([k == CATEGORICAL for k in self.kinds], dtype=np.bool_)

    def encode(self, frame: Frame) -> np.ndarray:
        X = np.empty((frame.n_rows, len(self.names)), dtype=np.float64)
        for j, (name, kind, levels) in enumerate(zip(self.names, self.kinds, self.levels)):
            if name not in frame:
                raise DataError(f"feature {name!r} missing from frame")
            col = frame[name]
            if col.kind != kind:
                raise DataError(f"feature {name!r} is {col.kind}, model expects {kind}")
            if kind == CATEGORICAL:
                if col.levels == levels:
                    X[:, j] = col.values
                else:
                    lookup = {lvl: i for i, lvl in enumerate(levels)}
                    mapping = np.empty(len(col.levels), dtype=np.float64)
                    for i, lvl in enumerate(col.levels):
                        mapping[i] = lookup.get(lvl, -1)
                    codes = mapping[col.values]
                    if (codes < 0).any():
                        bad = col.levels[int(col.values[np.argmax(codes < 0)])]
                        raise DataError(f"unseen level {bad!r} in feature {name!r}")
                    X[:, j] = codes
            else:
                X[:, j] = col.values
        return X


class FittedModel:
    """Base class for trained models.

    Subclasses implement ``raw(X)`` returning an (n, K) array: K=1 response
    column for regression, class probabilities otherwise.
    """

    def __init__(self, learner: Learner, task: Task):
        self.learner = learner
        self.encoder = FeatureEncoder(task.features())
        self.feature_names = self.encoder.names
        self.task_type = task.task_type
        self.class_levels = task.class_levels if task.is_classification else ()
        self.positive_class = task.positive_class
        self.predict_type = learner.effective_predict_type(task)

    @property
    def is_classification(self) -> bool:
        return self.task_type != REGRESSION

    @property
    def n_outputs(self) -> int:
        return len(self.class_levels) if self.is_classification else 1

    def raw(self, X: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def raw_grid(self, X: np.ndarray, feature: int, grid: np.ndarray) -> np.ndarray:
        """Outputs with column ``feature`` set to each grid value: (n, G, K)."""
        n, G = X.shape[0], len(grid)
        rep = np.repeat(X[np.newaxis, :, :], G, axis=0)
        rep[:, :, feature] = np.asarray(grid, dtype=np.float64)[:, np.newaxis]
        out = self.raw(rep.reshape(G * n, X.shape[1]))
        return out.reshape(G, n, -1).transpose(1, 0, 2).copy()

    def raw_permuted(self, X: np.ndarray, feature: int, perms) -> np.ndarray:
        """Outputs with column ``feature`` shuffled by each row of ``perms``: (R, n, K)."""
        outs = []
        for perm in perms:
            Xp = X.copy()
            Xp[:, feature] = X[perm, feature]
            outs.append(self.raw(Xp))
        return np.stack(outs)

    def prediction_from_raw(self, out: np.ndarray, row_ids=None, full: bool = False) -> Prediction:
        """Wrap raw outputs; ``full`` keeps probabilities regardless of predict_type."""
        if row_ids is None:
            row_ids = np.arange(out.shape[0])
        row_ids = np.asarray(row_ids, dtype=np.int64)
        if not self.is_classification:
            return Prediction(row_ids, self.task_type, response=out[:, 0].copy())
        labels = hard_labels(out)
        prob = out if full or self.predict_type == PROBABILITY else None
        return Prediction(row_ids, self.task_type, prob=prob, labels=labels, class_levels=self.class_levels)

    def predict(self, frame: Frame, row_ids=None) -> Prediction:
        return self.prediction_from_raw(self.raw(self.encoder.encode(frame)), row_ids)


class Algorithm:
    id: str = ""
    task_types: tuple[str, ...] = ()
    defaults: dict[str, Any] = {}

    @classmethod
    def train(cls, learner: Learner, task: Task, rows: np.ndarray, seed: int) -> FittedModel:
        raise NotImplementedError


def fit(learner: Learner, task: Task, row_indices=None, seed: int = 0) -> FittedModel:
    """Train ``learner`` on ``task`` restricted to ``row_indices``."""
    algo = learner.algorithm
    if task.task_type not in algo.task_types:
        raise FitError(f"learner {learner.id!r} does not support {task.task_type}")
    if learner.predict_type == PROBABILITY and not task.is_classification:
        raise FitError("probability predict_type requires a classification task")
    unknown = set(dict(learner.params)) - set(algo.defaults)
    if unknown:
        raise FitError(f"unknown hyperparameter(s) for {learner.id}: {sorted(unknown)}")
    if row_indices is None:
        rows = np.arange(task.n_rows)
    else:
        rows = np.asarray(row_indices, dtype=np.int64)
    if rows.size == 0:
        raise FitError("no training rows")
    if rows.min() < 0 or rows.max() >= task.n_rows:
        raise FitError("training row index out of range")
    if task.is_classification:
        if len(np.unique(task.target_column.values[rows])) < 2:
            raise FitError("training target is constant")
    return algo.train(learner, task, rows, seed)


def warn_fit(message: str) -> None:
    warnings.warn(message, FitWarning, stacklevel=3)
