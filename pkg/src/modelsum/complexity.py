"""Model complexity: sparsity and interaction strength, both from ALE curves."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from modelsum.effects import EffectCurve, ale_row_values
from modelsum.metrics import mean_sd

SPARSITY = "sparsity"
INTERACTION_STRENGTH = "interaction_strength"
DEFAULT_COMPLEXITY = (SPARSITY, INTERACTION_STRENGTH)

EPSILON_SCALE = 1e-5


class ComplexityWarning(UserWarning):
    pass


def sparsity(ale_curves: list[EffectCurve], prediction_range: float, epsilon_scale: float = EPSILON_SCALE) -> int:
    """Number of features whose ALE range exceeds ``epsilon_scale * prediction_range``."""
    if prediction_range <= 0:
        return 0
    eps = epsilon_scale * prediction_range
    return sum(1 for c in ale_curves if float(np.ptp(c.values)) > eps)


def interaction_strength(predictions: np.ndarray, main_effects: np.ndarray) -> float:
    """Share of prediction variance not captured by the additive main-effect model.

    ``main_effects`` holds one column per feature of per-row, mean-centered
    ALE contributions. Constant predictions give 0.
    """
    f = np.asarray(predictions, dtype=float)
    f0 = f.mean()
    denom = float(np.sum((f - f0) ** 2))
    if denom == 0.0:
        return 0.0
    f_main = f0 + (main_effects.sum(axis=1) if main_effects.size else 0.0)
    return float(np.sum((f - f_main) ** 2)) / denom


def main_effect_matrix(curves: list[EffectCurve], X: np.ndarray, columns: list[int]) -> np.ndarray:
    if not curves:
        return np.zeros((X.shape[0], 0))
    return np.column_stack([ale_row_values(c, X[:, j]) for c, j in zip(curves, columns)])


def fold_complexity(outputs: np.ndarray, ale_by_class: list[list[EffectCurve]], X: np.ndarray,
                    columns: list[int]) -> tuple[int, float]:
    """Sparsity and IAS for one fold.

    ``outputs`` is (rows x classes) for the modeled classes; with several
    classes a feature counts if any class uses it, and IAS pools squared
    errors over classes.
    """
    used = set()
    num = 0.0
    den = 0.0
    for k, curves in enumerate(ale_by_class):
        f = outputs[:, k]
        rng = float(np.ptp(f)) if len(f) else 0.0
        if rng > 0:
            eps = EPSILON_SCALE * rng
            used.update(i for i, c in enumerate(curves) if float(np.ptp(c.values)) > eps)
        f0 = f.mean()
        f_main = f0 + main_effect_matrix(curves, X, columns).sum(axis=1)
        num += float(np.sum((f - f_main) ** 2))
        den += float(np.sum((f - f0) ** 2))
    ias = num / den if den > 0 else 0.0
    return len(used), ias


@dataclass
class ComplexityRecord:
    fold: int
    sparsity: int
    interaction_strength: float


@dataclass
class ComplexitySummary:
    measures: list[str]
    mean: dict[str, float]
    sd: dict[str, float]
    per_fold: dict[str, list[float]]
    flags: list[str] = field(default_factory=list)


def aggregate_complexity(records: list[ComplexityRecord], measures=DEFAULT_COMPLEXITY) -> ComplexitySummary:
    means, sds, folds, flags = {}, {}, {}, []
    for m in measures:
        vals = [float(getattr(r, m)) for r in records]
        mean, sd, single = mean_sd(vals)
        if single:
            flags.append(f"{m}: single fold, sd set to 0")
        means[m], sds[m], folds[m] = mean, sd, vals
    if INTERACTION_STRENGTH in measures:
        over = [r.fold for r in records if r.interaction_strength > 1]
        if over:
            msg = f"interaction strength above 1 in fold(s) {over}"
            flags.append(msg)
            warnings.warn(msg, ComplexityWarning, stacklevel=2)
    return ComplexitySummary(list(measures), means, sds, folds, flags)
