"""Permutation feature importance and PDP-based importance."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from modelsum import _rng
from modelsum.effects import EffectCurve
from modelsum.metrics import MAXIMIZE, evaluate_measure, get_measure, mean_sd
from modelsum.tabular import REGRESSION

PDP_IMPORTANCE = "pdp"
DEFAULT_REPETITIONS = 5


def default_loss(task_type: str) -> str:
    return "mse" if task_type == REGRESSION else "ce"


def default_importance_measures(task_type: str) -> list[str]:
    return [PDP_IMPORTANCE, f"pfi.{default_loss(task_type)}"]


def pfi_measure_id(importance_id: str) -> str:
    if not importance_id.startswith("pfi."):
        raise ValueError(f"not a permutation importance id: {importance_id!r}")
    return importance_id[4:]


def _loss(measure, model, out, truth, positive, row_ids):
    pred = model.prediction_from_raw(out, row_ids, full=True)
    value = evaluate_measure(measure, pred, truth, positive)
    # importance is always "loss increase"; flip measures that are maximized
    return -value if measure.direction == MAXIMIZE else value


def pfi_matrix(model, X: np.ndarray, truth, measure, repetitions: int = DEFAULT_REPETITIONS,
               seed: int = 0, fold: int = 0, positive: int | None = None,
               features: list[int] | None = None) -> np.ndarray:
    """Per-feature, per-repetition loss increase: shape (features, repetitions).

    Each (fold, feature, repetition) permutation has its own seeded stream.
    """
    measure = get_measure(measure)
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    truth = np.asarray(truth)
    row_ids = np.arange(X.shape[0])
    base = _loss(measure, model, model.raw(X), truth, positive, row_ids)
    features = list(range(X.shape[1])) if features is None else features
    out = np.zeros((len(features), repetitions))
    for a, j in enumerate(features):
        perms = np.stack([
            _rng.derive_rng(seed, _rng.PFI, fold, j, r).permutation(X.shape[0]) for r in range(repetitions)
        ])
        outputs = model.raw_permuted(X, j, perms)
        for r in range(repetitions):
            out[a, r] = _loss(measure, model, outputs[r], truth, positive, row_ids) - base
    return out


def pfi(model, frame, truth, measure, repetitions: int = DEFAULT_REPETITIONS, seed: int = 0,
        fold: int = 0, positive: int | None = None) -> dict[str, float]:
    """Mean loss increase over ``repetitions`` seeded shuffles of each feature."""
    X = model.encoder.encode(frame)
    if positive is None and model.positive_class is not None:
        positive = model.class_levels.index(model.positive_class)
    values = pfi_matrix(model, X, truth, measure, repetitions, seed, fold, positive)
    return {name: float(v) for name, v in zip(model.feature_names, values.mean(axis=1))}


def pdp_importance(curve: EffectCurve) -> float:
    """Sample sd of a numeric PDP; range/4 for categorical bars."""
    if curve.degenerate or len(curve.values) < 2:
        return 0.0
    if curve.grid.is_categorical:
        return float((np.max(curve.values) - np.min(curve.values)) / 4.0)
    return float(np.std(curve.values, ddof=1))


@dataclass
class ImportanceRow:
    feature: str
    mean: dict[str, float]
    sd: dict[str, float]
    per_fold: dict[str, list[float]]


@dataclass
class ImportanceTable:
    measures: list[str]
    rows: list[ImportanceRow]
    n_features: int
    flags: list[str] = field(default_factory=list)


def importance_table(per_fold: dict[str, list[dict[str, float]]], measures: list[str],
                     n_important: int = 15) -> ImportanceTable:
    """Aggregate per-fold importances into mean/sd rows.

    ``per_fold[measure][fold][feature]``. Rows are sorted by the first
    measure's mean (descending, ties by feature name) and truncated.
    """
    if n_important < 1:
        raise ValueError("n_important must be >= 1")
    features = sorted({f for m in measures for fold in per_fold[m] for f in fold})
    rows = []
    flags = []
    for f in features:
        means, sds, folds = {}, {}, {}
        for m in measures:
            vals = [fold.get(f) for fold in per_fold[m]]
            mean, sd, single = mean_sd(vals)
            if single and f == features[0]:
                flags.append("single fold, sd set to 0")
            means[m], sds[m], folds[m] = mean, sd, vals
        rows.append(ImportanceRow(f, means, sds, folds))
    key = measures[0]
    rows.sort(key=lambda r: (-np.nan_to_num(r.mean[key], nan=-np.inf), r.feature))
    return ImportanceTable(list(measures), rows[:n_important], len(features), flags)
