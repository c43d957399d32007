"""Group fairness measures over a protected attribute."""

from __future__ import annotations

import itertools
from fractions import Fraction
import warnings
from dataclasses import dataclass, field

import numpy as np

from modelsum.metrics import mean_sd
from modelsum.tabular import REGRESSION

DP = "dp"
EOD = "eod"
CUAE = "cuae"
REG_MSE_GAP = "reg_mse_gap"

CLASSIFICATION_MEASURES = (DP, EOD, CUAE)
FAIRNESS_MEASURES = CLASSIFICATION_MEASURES + (REG_MSE_GAP,)


class FairnessWarning(UserWarning):
    pass


class FairnessUndefined(ValueError):
    pass


def default_fairness_measures(task_type: str) -> list[str]:
    return [REG_MSE_GAP] if task_type == REGRESSION else [DP, CUAE, EOD]


def _rate(numer_mask, denom_mask) -> Fraction | None:
    # exact rationals, so hand-checkable gaps such as 8/10 - 6/10 come out exact
    d = int(np.sum(denom_mask))
    if d == 0:
        return None
    return Fraction(int(np.sum(numer_mask & denom_mask)), d)


def max_gap(rates: list[float | None]) -> float | None:
    """Largest pairwise absolute difference among defined rates."""
    defined = [r for r in rates if r is not None]
    if len(defined) < 2:
        return None
    return max(abs(a - b) for a, b in itertools.combinations(defined, 2))


def _compose(gaps: list[Fraction | None], flags: list[str], name: str) -> float:
    defined = [g for g in gaps if g is not None]
    if len(defined) < len(gaps):
        flags.append(f"{name}: rate undefined in a group, term skipped")
    if not defined:
        raise FairnessUndefined(f"{name}: no group rates defined")
    return float(sum(defined) / len(defined))


def group_rates(labels, truth, groups, positive: int) -> dict[str, list[Fraction | None]]:
    labels = np.asarray(labels)
    truth = np.asarray(truth)
    groups = np.asarray(groups)
    out = {"ppr": [], "tpr": [], "fpr": [], "ppv": [], "npv": []}
    for g in np.unique(groups):
        in_g = groups == g
        pred_pos = (labels == positive) & in_g
        pred_neg = (labels != positive) & in_g
        true_pos = (truth == positive) & in_g
        true_neg = (truth != positive) & in_g
        out["ppr"].append(_rate(pred_pos, in_g))
        out["tpr"].append(_rate(pred_pos, true_pos))
        out["fpr"].append(_rate(pred_pos, true_neg))
        out["ppv"].append(_rate(true_pos, pred_pos))
        out["npv"].append(_rate(true_neg, pred_neg))
    return out


def fairness_measure(id: str, labels=None, truth=None, groups=None, positive: int = 0,
                     response=None, flags: list[str] | None = None) -> float:
    """Evaluate one fairness measure; 0 means parity on these rows.

    Binary rates are taken for ``positive``; with more than two groups each
    rate gap is the maximum pairwise difference.
    """
    flags = [] if flags is None else flags
    groups = np.asarray(groups)
    if len(np.unique(groups)) < 2:
        raise FairnessUndefined("fewer than two protected groups present")
    if id == REG_MSE_GAP:
        sq = (np.asarray(truth, dtype=float) - np.asarray(response, dtype=float)) ** 2
        mses = [float(np.mean(sq[groups == g])) for g in np.unique(groups)]
        return max_gap(mses)
    rates = group_rates(labels, truth, groups, positive)
    if id == DP:
        return _compose([max_gap(rates["ppr"])], flags, DP)
    if id == EOD:
        return _compose([max_gap(rates["tpr"]), max_gap(rates["fpr"])], flags, EOD)
    if id == CUAE:
        return _compose([max_gap(rates["ppv"]), max_gap(rates["npv"])], flags, CUAE)
    raise ValueError(f"unknown fairness measure {id!r}")


def resolve_protected(task, control) -> str | None:
    """The control's protected attribute wins over the task's column role."""
    chosen = getattr(control, "protected_attribute", None) or task.protected_attribute
    if chosen is None:
        return None
    col = task.frame[chosen] if chosen in task.frame else None
    if col is None:
        raise ValueError(f"protected attribute {chosen!r} not in data")
    if not col.is_categorical or len(col.levels) < 2:
        raise ValueError("protected attribute must be categorical with at least 2 levels")
    return chosen


@dataclass
class FairnessSummary:
    protected_attribute: str
    groups: list[str]
    measures: list[str]
    mean: dict[str, float]
    sd: dict[str, float]
    per_fold: dict[str, list[float | None]]
    flags: list[str] = field(default_factory=list)


def _fold_values(id, task, it, protected, positives, flags):
    pred = it.prediction
    truth = task.target_column.values[it.test]
    groups = task.frame[protected].values[it.test]
    if id == REG_MSE_GAP:
        if task.is_classification:
            raise ValueError("reg_mse_gap needs a regression task")
        return fairness_measure(id, truth=truth, groups=groups, response=pred.response, flags=flags)
    if not task.is_classification:
        raise ValueError(f"{id} needs a classification task")
    # one-vs-rest per class for multiclass, worst class reported
    vals = [fairness_measure(id, pred.labels, truth, groups, positive=k, flags=flags) for k in positives]
    return max(vals)


def summarize_fairness(resample_result, protected: str, measures: list[str]) -> FairnessSummary:
    task = resample_result.task
    positives = [task.positive_index] if task.positive_index is not None else list(range(len(task.class_levels)))
    means, sds, folds, flags = {}, {}, {}, []
    for m in measures:
        if m not in FAIRNESS_MEASURES:
            raise ValueError(f"unknown fairness measure {m!r}")
        vals: list[float | None] = []
        for it in resample_result.iterations:
            fold_flags: list[str] = []
            try:
                vals.append(_fold_values(m, task, it, protected, positives, fold_flags))
            except FairnessUndefined as exc:
                vals.append(None)
                fold_flags.append(str(exc))
                warnings.warn(f"{m} NA in fold {it.index}: {exc}", FairnessWarning, stacklevel=2)
            flags.extend(f"fold {it.index}: {f}" for f in dict.fromkeys(fold_flags))
        mean, sd, single = mean_sd(vals)
        if single:
            flags.append(f"{m}: single fold, sd set to 0")
        means[m], sds[m], folds[m] = mean, sd, vals
    levels = list(task.frame[protected].levels)
    return FairnessSummary(protected, levels, list(measures), means, sds, folds, flags)
