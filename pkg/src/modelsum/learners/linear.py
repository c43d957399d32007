"""Featureless baseline, least squares and logistic regression."""

from __future__ import annotations

import numpy as np

from modelsum.tabular import BINARY, MULTICLASS, REGRESSION
from modelsum.learners.base import Algorithm, FittedModel, warn_fit

RIDGE_FALLBACK = 1e-8


class FeaturelessModel(FittedModel):
    def __init__(self, learner, task, constant: np.ndarray):
        super().__init__(learner, task)
        self.constant = constant

    def raw(self, X):
        return np.tile(self.constant, (X.shape[0], 1))

    def raw_grid(self, X, feature, grid):
        return np.tile(self.constant, (X.shape[0], len(grid), 1))


class Featureless(Algorithm):
    id = "featureless"
    task_types = (REGRESSION, BINARY, MULTICLASS)
    defaults = {}

    @classmethod
    def train(cls, learner, task, rows, seed):
        y = task.target_column.values[rows]
        if task.is_classification:
            counts = np.bincount(y, minlength=len(task.class_levels))
            constant = counts / counts.sum()
        else:
            constant = np.array([np.mean(y)])
        return FeaturelessModel(learner, task, constant)


def design_matrix(X: np.ndarray, is_cat: np.ndarray, n_levels: list[int]) -> np.ndarray:
    """Intercept, numeric columns as-is, categoricals dummy coded (first level dropped)."""
    blocks = [np.ones((X.shape[0], 1))]
    for j in range(X.shape[1]):
        if is_cat[j]:
            codes = X[:, j].astype(np.int64)
            dummies = np.zeros((X.shape[0], max(n_levels[j] - 1, 0)))
            hit = codes > 0
            dummies[np.nonzero(hit)[0], codes[hit] - 1] = 1.0
            blocks.append(dummies)
        else:
            blocks.append(X[:, j:j + 1])
    return np.hstack(blocks)


def linear_predictor(D: np.ndarray, coef: np.ndarray) -> np.ndarray:
    # column-wise accumulation: each row's value is independent of batch size
    eta = np.full(D.shape[0], coef[0])
    for k in range(1, D.shape[1]):
        eta += D[:, k] * coef[k]
    return eta


class _DesignModel(FittedModel):
    def __init__(self, learner, task, coef):
        super().__init__(learner, task)
        self.coef = coef
        self._is_cat = self.encoder.is_categorical
        self._n_levels = [len(lv) for lv in self.encoder.levels]

    def design(self, X):
        return design_matrix(X, self._is_cat, self._n_levels)

    def coefficient_names(self) -> list[str]:
        names = ["(intercept)"]
        for name, levels, cat in zip(self.feature_names, self.encoder.levels, self._is_cat):
            if cat:
                names.extend(f"{name}{lvl}" for lvl in levels[1:])
            else:
                names.append(name)
        return names


class LinearModel(_DesignModel):
    def raw(self, X):
        return linear_predictor(self.design(X), self.coef)[:, np.newaxis]


class Linear(Algorithm):
    id = "linear"
    task_types = (REGRESSION,)
    defaults = {}

    @classmethod
    def train(cls, learner, task, rows, seed):
        model = LinearModel(learner, task, None)
        X = model.encoder.encode(task.frame.take(rows))
        D = model.design(X)
        y = task.target_column.values[rows]
        if np.linalg.matrix_rank(D) < D.shape[1]:
            warn_fit(f"singular design ({D.shape[1]} columns), using ridge penalty {RIDGE_FALLBACK}")
            penalty = RIDGE_FALLBACK * np.eye(D.shape[1])
            penalty[0, 0] = 0.0
            coef = np.linalg.solve(D.T @ D + penalty, D.T @ y)
        else:
            coef = np.linalg.lstsq(D, y, rcond=None)[0]
        model.coef = coef
        return model


def _sigmoid(eta):
    return np.where(eta >= 0, 1.0 / (1.0 + np.exp(-np.abs(eta))), np.exp(-np.abs(eta)) / (1.0 + np.exp(-np.abs(eta))))


class LogisticModel(_DesignModel):
    """Binary logistic regression; the linear predictor models the second level."""

    def raw(self, X):
        p1 = _sigmoid(linear_predictor(self.design(X), self.coef))
        return np.column_stack([1.0 - p1, p1])


class Logistic(Algorithm):
    id = "logistic"
    task_types = (BINARY,)
    defaults = {"max_iter": 100, "tol": 1e-8}

    @classmethod
    def train(cls, learner, task, rows, seed):
        hp = learner.hyperparameters()
        model = LogisticModel(learner, task, None)
        X = model.encoder.encode(task.frame.take(rows))
        D = model.design(X)
        y = (task.target_column.values[rows] == 1).astype(np.float64)
        coef = np.zeros(D.shape[1])
        converged = False
        for _ in range(int(hp["max_iter"])):
            p = _sigmoid(D @ coef)
            w = np.clip(p * (1 - p), 1e-10, None)
            z = D @ coef + (y - p) / w
            sw = np.sqrt(w)
            new = np.linalg.lstsq(D * sw[:, np.newaxis], z * sw, rcond=None)[0]
            step = np.max(np.abs(new - coef))
            coef = new
            if step < hp["tol"]:
                converged = True
                break
        if not converged:
            warn_fit(f"logistic regression did not converge in {hp['max_iter']} iterations (separation?)")
        model.coef = coef
        return model
