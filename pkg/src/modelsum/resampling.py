"""Resampling strategies and the resample loop with stored models."""

from __future__ import annotations

import os
import re
import time
import warnings
from dataclasses import dataclass

import numpy as np

from modelsum import _rng
from modelsum.learners import FittedModel, Learner, Prediction, fit
from modelsum.parallel import run_tasks
from modelsum.tabular import Column, Task

CV = "cv"
HOLDOUT = "holdout"
SUBSAMPLING = "subsampling"


class ResamplingError(RuntimeError):
    def __init__(self, message: str, fold: int | None = None):
        super().__init__(message if fold is None else f"fold {fold}: {message}")
        self.fold = fold


class StratificationWarning(UserWarning):
    pass


@dataclass(frozen=True)
class ResamplingStrategy:
    kind: str = CV
    folds: int = 3
    ratio: float = 2 / 3
    repeats: int = 1
    stratify: bool = True
    seed: int | None = None

    def __post_init__(self):
        if self.kind not in (CV, HOLDOUT, SUBSAMPLING):
            raise ValueError(f"unknown resampling kind {self.kind!r}")
        if self.kind == CV and self.folds < 2:
            raise ValueError("cv needs at least 2 folds")
        if not 0 < self.ratio < 1:
            raise ValueError("train ratio must lie in (0, 1)")
        if self.repeats < 1:
            raise ValueError("repeats must be >= 1")

    @property
    def iterations(self) -> int:
        return {CV: self.folds, HOLDOUT: 1, SUBSAMPLING: self.repeats}[self.kind]

    def describe(self) -> str:
        if self.kind == CV:
            return f"cv with {self.folds} folds"
        if self.kind == HOLDOUT:
            return f"holdout with train ratio {self.ratio:.4g}"
        return f"subsampling with train ratio {self.ratio:.4g}, {self.repeats} repeats"

    def spec(self) -> str:
        if self.kind == CV:
            return f"cv{self.folds}"
        if self.kind == HOLDOUT:
            return f"holdout:{self.ratio:g}"
        return f"subsampling:{self.ratio:g}x{self.repeats}"


def parse_strategy(spec: str, stratify: bool = True, seed: int | None = None) -> ResamplingStrategy:
    """Parse ``cv3``, ``cv5``, ``holdout:0.66`` or ``subsampling:0.66x10``."""
    spec = spec.strip()
    if m := re.fullmatch(r"cv(\d+)", spec):
        return ResamplingStrategy(CV, folds=int(m.group(1)), stratify=stratify, seed=seed)
    if m := re.fullmatch(r"holdout(?::([0-9.]+))?", spec):
        ratio = float(m.group(1)) if m.group(1) else 2 / 3
        return ResamplingStrategy(HOLDOUT, ratio=ratio, stratify=stratify, seed=seed)
    if m := re.fullmatch(r"subsampling(?::([0-9.]+)(?:x(\d+))?)?", spec):
        ratio = float(m.group(1)) if m.group(1) else 2 / 3
        repeats = int(m.group(2)) if m.group(2) else 30
        return ResamplingStrategy(SUBSAMPLING, ratio=ratio, repeats=repeats, stratify=stratify, seed=seed)
    raise ValueError(f"unrecognized resampling spec {spec!r}")


def _holdout(n: int, ratio: float, rng: np.random.Generator):
    n_train = min(max(int(round(ratio * n)), 1), n - 1)
    perm = rng.permutation(n)
    return np.sort(perm[:n_train]), np.sort(perm[n_train:])


def split(strategy: ResamplingStrategy, n: int, stratify_by: Column | None = None, seed: int = 0):
    """Return a list of (train, test) index arrays, both sorted ascending.

    cv assigns a (per-class, if stratified) shuffled order round-robin to
    folds, so fold sizes differ by at most one and each fold's class counts
    are within one of proportional.
    """
    seed = strategy.seed if strategy.seed is not None else seed
    rng = _rng.derive_rng(seed, _rng.SPLIT)
    if strategy.kind == CV:
        k = strategy.folds
        if n < k:
            raise ValueError(f"cannot split {n} rows into {k} folds")
        order = None
        if strategy.stratify and stratify_by is not None and stratify_by.is_categorical:
            codes = stratify_by.values
            counts = np.bincount(codes, minlength=len(stratify_by.levels))
            present = counts[counts > 0]
            if present.min() < k:
                warnings.warn(
                    f"a class has fewer than {k} rows; using unstratified cv",
                    StratificationWarning,
                    stacklevel=2,
                )
            else:
                order = np.concatenate(
                    [rng.permutation(np.flatnonzero(codes == c)) for c in range(len(counts)) if counts[c]]
                )
        if order is None:
            order = rng.permutation(n)
        fold_of = np.empty(n, dtype=np.int64)
        fold_of[order] = np.arange(n) % k
        all_rows = np.arange(n)
        return [(all_rows[fold_of != f], all_rows[fold_of == f]) for f in range(k)]
    if strategy.kind == HOLDOUT:
        return [_holdout(n, strategy.ratio, rng)]
    return [_holdout(n, strategy.ratio, _rng.derive_rng(seed, _rng.SPLIT, r)) for r in range(strategy.repeats)]


@dataclass
class Iteration:
    index: int
    train: np.ndarray
    test: np.ndarray
    prediction: Prediction
    model: FittedModel | None
    seconds: float = 0.0


@dataclass
class ResampleResult:
    task: Task
    learner: Learner
    strategy: ResamplingStrategy
    iterations: list[Iteration]
    seed: int = 0

    @property
    def n_iterations(self) -> int:
        return len(self.iterations)

    @property
    def models_stored(self) -> bool:
        return all(it.model is not None for it in self.iterations)

    def truth(self, iteration: Iteration) -> np.ndarray:
        return self.task.target_column.values[iteration.test]


def fold_seed(seed: int, i: int) -> int:
    return _rng.derive_seed(seed, _rng.FIT, i)


def _fit_fold(task, learner, train, test, fold_seed_value, index, store_model):
    start = time.perf_counter()
    try:
        model = fit(learner, task, train, fold_seed_value)
        prediction = model.predict(task.frame.take(test), row_ids=test)
    except Exception as exc:  # attach the fold index, keep the cause
        raise ResamplingError(str(exc), fold=index) from exc
    seconds = time.perf_counter() - start
    return Iteration(index, train, test, prediction, model if store_model else None, seconds)


def default_workers() -> int:
    value = os.environ.get("MODELSUM_WORKERS")
    return max(1, int(value)) if value else 1


def resample(
    task: Task,
    learner: Learner,
    strategy: ResamplingStrategy,
    workers: int | None = None,
    seed: int = 0,
    store_models: bool = True,
) -> ResampleResult:
    """Fit on each training split and predict the held-out rows.

    Output is identical for any ``workers``: each fold's seed depends only on
    the master seed and the fold index.
    """
    if task.task_type not in learner.task_types:
        raise ResamplingError(f"learner {learner.id!r} does not support {task.task_type}")
    stratify_by = task.target_column if task.is_classification else None
    splits = split(strategy, task.n_rows, stratify_by, seed)
    jobs = [
        (_fit_fold, (task, learner, train, test, fold_seed(seed, i), i, store_models))
        for i, (train, test) in enumerate(splits)
    ]
    iterations = run_tasks(jobs, workers if workers is not None else default_workers())
    return ResampleResult(task, learner, strategy, iterations, seed)
