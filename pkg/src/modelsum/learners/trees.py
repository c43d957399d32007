"""CART decision tree and random forest backed by the compiled kernels."""

from __future__ import annotations

import math

import numpy as np

from modelsum import _rng
from modelsum.tabular import BINARY, MULTICLASS, REGRESSION
from modelsum.learners.base import Algorithm, FeatureEncoder, FittedModel
from modelsum.learners._kernels import build_tree, predict_ensemble, predict_ensemble_grid, predict_ensemble_permuted


class EnsembleModel(FittedModel):
    """One or more trees stored as concatenated node arrays."""

    def __init__(self, learner, task, trees):
        super().__init__(learner, task)
        offsets = np.cumsum([0] + [len(t[0]) for t in trees[:-1]])
        self.roots = np.asarray(offsets, dtype=np.int64)
        self.feat = np.concatenate([t[0] for t in trees])
        self.thr = np.concatenate([t[1] for t in trees])
        self.iscat = np.concatenate([t[2] for t in trees])
        shift = lambda child, off: np.where(child >= 0, child + off, child)
        self.left = np.concatenate([shift(t[3], o) for t, o in zip(trees, offsets)])
        self.right = np.concatenate([shift(t[4], o) for t, o in zip(trees, offsets)])
        self.value = np.concatenate([t[5] for t in trees])

    @property
    def n_trees(self) -> int:
        return len(self.roots)

    @property
    def n_nodes(self) -> int:
        return len(self.feat)

    def _arrays(self):
        return self.feat, self.thr, self.iscat, self.left, self.right, self.value, self.roots

    def raw(self, X):
        return predict_ensemble(*self._arrays(), np.ascontiguousarray(X, dtype=np.float64))

    def raw_grid(self, X, feature, grid):
        grid = np.asarray(grid, dtype=np.float64)
        if np.any(np.diff(grid) <= 0):
            return super().raw_grid(X, feature, grid)
        return predict_ensemble_grid(
            *self._arrays(), np.ascontiguousarray(X, dtype=np.float64), int(feature), grid
        )

    def raw_permuted(self, X, feature, perms):
        X = np.ascontiguousarray(X, dtype=np.float64)
        V = np.ascontiguousarray(X[np.asarray(perms), feature])
        return predict_ensemble_permuted(*self._arrays(), X, int(feature), V)


def _auto_min_leaf(task) -> int:
    return 1 if task.is_classification else 5


def _grow(task, samples, seeds, mtry, min_leaf, max_depth, encoder):
    X = encoder.encode(task.frame)
    is_cat = encoder.is_categorical
    n_levels = np.array([max(len(lv), 1) for lv in encoder.levels], dtype=np.int64)
    target = task.target_column
    if task.is_classification:
        y_cls = target.values.astype(np.int64)
        y_reg = np.zeros(1)
        n_classes = len(target.levels)
    else:
        y_cls = np.zeros(1, dtype=np.int64)
        y_reg = target.values.astype(np.float64)
        n_classes = 0
    return [
        build_tree(X, is_cat, n_levels, y_reg, y_cls, n_classes, sample,
                   mtry, min_leaf, max_depth, seed)
        for sample, seed in zip(samples, seeds)
    ]


class Tree(Algorithm):
    id = "tree"
    task_types = (REGRESSION, BINARY, MULTICLASS)
    defaults = {"max_depth": 30, "min_leaf": None}

    @classmethod
    def train(cls, learner, task, rows, seed):
        hp = learner.hyperparameters()
        encoder = FeatureEncoder(task.features())
        p = len(encoder.names)
        min_leaf = hp["min_leaf"] or _auto_min_leaf(task)
        trees = _grow(task, [rows], [0], p, int(min_leaf), int(hp["max_depth"]), encoder)
        return EnsembleModel(learner, task, trees)


class RandomForest(Algorithm):
    id = "random_forest"
    task_types = (REGRESSION, BINARY, MULTICLASS)
    defaults = {"num_trees": 500, "mtry": None, "bootstrap": True, "min_leaf": None, "max_depth": 30}

    @classmethod
    def train(cls, learner, task, rows, seed):
        hp = learner.hyperparameters()
        encoder = FeatureEncoder(task.features())
        p = len(encoder.names)
        mtry = hp["mtry"] or max(1, int(math.floor(math.sqrt(p))))
        mtry = min(int(mtry), p)
        min_leaf = int(hp["min_leaf"] or _auto_min_leaf(task))
        rng = _rng.derive_rng(seed, _rng.FIT)
        samples, seeds = [], []
        for _ in range(int(hp["num_trees"])):
            if hp["bootstrap"]:
                samples.append(rows[rng.integers(0, len(rows), size=len(rows))])
            else:
                samples.append(rows)
            seeds.append(int(rng.integers(0, 2**31 - 1)))
        trees = _grow(task, samples, seeds, mtry, min_leaf, int(hp["max_depth"]), encoder)
        return EnsembleModel(learner, task, trees)
