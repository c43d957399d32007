"""Performance measures, macro/micro aggregation and confusion matrices."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata

from modelsum.learners import Prediction
from modelsum.tabular import BINARY, MULTICLASS, REGRESSION

MINIMIZE = "minimize"
MAXIMIZE = "maximize"

NEEDS_PROB = "probabilities"
NEEDS_LABELS = "hard labels"
NEEDS_RESPONSE = "response"

MACRO = "macro"
MICRO = "micro"


class MeasureError(ValueError):
    """Measure undefined for the given predictions (reported as NA)."""


class AggregationWarning(UserWarning):
    pass


@dataclass(frozen=True)
class Measure:
    id: str
    direction: str
    task_types: tuple[str, ...]
    needs: str
    fn: object = field(repr=False, compare=False)
    supports_micro: bool = True

    def applicable(self, prediction: Prediction) -> bool:
        if prediction.task_type not in self.task_types:
            return False
        if self.needs == NEEDS_PROB:
            return prediction.prob is not None
        if self.needs == NEEDS_LABELS:
            return prediction.labels is not None
        return prediction.response is not None


@dataclass
class ScoreContext:
    """Per-evaluation notes, e.g. when a degenerate-case convention fired."""

    flags: list[str] = field(default_factory=list)


def _positive(prediction: Prediction, positive: int):
    return prediction.prob[:, positive]


def auc_score(scores: np.ndarray, is_pos: np.ndarray) -> float:
    """Mann-Whitney AUC; tied (pos, neg) pairs count one half."""
    n_pos = int(is_pos.sum())
    n_neg = len(is_pos) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise MeasureError("auc undefined: truth has a single class")
    ranks = rankdata(scores, method="average")
    u = ranks[is_pos].sum() - n_pos * (n_pos + 1) / 2.0
    return float(u / (n_pos * n_neg))


def binary_counts(labels: np.ndarray, truth: np.ndarray, positive: int):
    pred_pos = labels == positive
    true_pos = truth == positive
    tp = int(np.sum(pred_pos & true_pos))
    fp = int(np.sum(pred_pos & ~true_pos))
    fn = int(np.sum(~pred_pos & true_pos))
    tn = int(np.sum(~pred_pos & ~true_pos))
    return tp, fp, fn, tn


def fbeta_from_counts(tp, fp, fn, beta: float = 1.0) -> float:
    b2 = beta * beta
    denom = (1 + b2) * tp + b2 * fn + fp
    if denom == 0:
        raise MeasureError("fbeta undefined: no positive truths or predictions")
    return (1 + b2) * tp / denom


def mcc_from_counts(tp, fp, fn, tn, ctx: ScoreContext | None = None) -> float:
    denom = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn)
    if denom == 0:
        if ctx is not None:
            ctx.flags.append("mcc zero denominator, set to 0")
        return 0.0
    return (tp * tn - fp * fn) / math.sqrt(denom)


def _auc(pred, truth, positive, ctx):
    return auc_score(_positive(pred, positive), truth == positive)


def _fbeta(pred, truth, positive, ctx):
    tp, fp, fn, _ = binary_counts(pred.labels, truth, positive)
    return fbeta_from_counts(tp, fp, fn)


def _bbrier(pred, truth, positive, ctx):
    p = _positive(pred, positive)
    return float(np.mean((p - (truth == positive)) ** 2))


def _mcc(pred, truth, positive, ctx):
    return mcc_from_counts(*binary_counts(pred.labels, truth, positive), ctx)


def _acc(pred, truth, positive, ctx):
    return float(np.mean(pred.labels == truth))


def _ce(pred, truth, positive, ctx):
    return float(np.mean(pred.labels != truth))


def _mbrier(pred, truth, positive, ctx):
    onehot = np.zeros_like(pred.prob)
    onehot[np.arange(len(truth)), truth] = 1.0
    return float(np.mean(np.sum((pred.prob - onehot) ** 2, axis=1)))


def _rmse(pred, truth, positive, ctx):
    return float(np.sqrt(np.mean((truth - pred.response) ** 2)))


def _mse(pred, truth, positive, ctx):
    return float(np.mean((truth - pred.response) ** 2))


def _mae(pred, truth, positive, ctx):
    return float(np.mean(np.abs(truth - pred.response)))


def _medae(pred, truth, positive, ctx):
    return float(np.median(np.abs(truth - pred.response)))


def _rsq(pred, truth, positive, ctx):
    sst = float(np.sum((truth - np.mean(truth)) ** 2))
    if sst == 0:
        raise MeasureError("rsq undefined: constant truth")
    return 1.0 - float(np.sum((truth - pred.response) ** 2)) / sst


CLASSIF = (BINARY, MULTICLASS)

MEASURES: dict[str, Measure] = {
    m.id: m
    for m in [
        Measure("auc", MAXIMIZE, (BINARY,), NEEDS_PROB, _auc),
        Measure("fbeta", MAXIMIZE, (BINARY,), NEEDS_LABELS, _fbeta),
        Measure("bbrier", MINIMIZE, (BINARY,), NEEDS_PROB, _bbrier),
        Measure("mcc", MAXIMIZE, (BINARY,), NEEDS_LABELS, _mcc),
        Measure("acc", MAXIMIZE, CLASSIF, NEEDS_LABELS, _acc),
        Measure("ce", MINIMIZE, CLASSIF, NEEDS_LABELS, _ce),
        Measure("mbrier", MINIMIZE, CLASSIF, NEEDS_PROB, _mbrier),
        Measure("rmse", MINIMIZE, (REGRESSION,), NEEDS_RESPONSE, _rmse),
        Measure("mse", MINIMIZE, (REGRESSION,), NEEDS_RESPONSE, _mse),
        Measure("mae", MINIMIZE, (REGRESSION,), NEEDS_RESPONSE, _mae),
        Measure("rsq", MAXIMIZE, (REGRESSION,), NEEDS_RESPONSE, _rsq),
        Measure("medae", MINIMIZE, (REGRESSION,), NEEDS_RESPONSE, _medae),
    ]
}

DEFAULTS = {
    BINARY: ("auc", "fbeta", "bbrier", "mcc"),
    MULTICLASS: ("acc", "ce", "mbrier"),
    REGRESSION: ("rmse", "mae", "rsq", "medae"),
}


def get_measure(measure) -> Measure:
    if isinstance(measure, Measure):
        return measure
    try:
        return MEASURES[measure]
    except KeyError:
        raise ValueError(f"unknown measure {measure!r}") from None


def default_measures(task_type: str) -> list[Measure]:
    return [MEASURES[m] for m in DEFAULTS[task_type]]


def evaluate_measure(measure, prediction: Prediction, truth, positive: int | None = None,
                     ctx: ScoreContext | None = None) -> float:
    """Score one prediction. ``positive`` is the positive level index (binary)."""
    measure = get_measure(measure)
    if prediction.task_type not in measure.task_types:
        raise MeasureError(f"{measure.id} does not apply to {prediction.task_type}")
    if not measure.applicable(prediction):
        raise MeasureError(f"{measure.id} needs {measure.needs}")
    truth = np.asarray(truth)
    if len(truth) != len(prediction):
        raise ValueError("truth and prediction have different lengths")
    if measure.task_types == (BINARY,) and positive is None:
        raise ValueError(f"{measure.id} needs the positive class index")
    return float(measure.fn(prediction, truth, positive, ctx))


def pool_predictions(predictions: list[Prediction]) -> Prediction:
    first = predictions[0]
    cat = lambda name: None if getattr(first, name) is None else np.concatenate([getattr(p, name) for p in predictions])
    return Prediction(
        row_ids=np.concatenate([p.row_ids for p in predictions]),
        task_type=first.task_type,
        response=cat("response"),
        prob=cat("prob"),
        labels=cat("labels"),
        class_levels=first.class_levels,
    )


def mean_sd(values) -> tuple[float, float, bool]:
    """Mean and sample sd of the finite values; a single value gets sd 0 (flagged)."""
    vals = np.asarray([v for v in values if v is not None and np.isfinite(v)], dtype=float)
    if vals.size == 0:
        return float("nan"), float("nan"), False
    if vals.size == 1:
        return float(vals[0]), 0.0, True
    return float(np.mean(vals)), float(np.std(vals, ddof=1)), False


@dataclass
class AggregatedMeasure:
    id: str
    mode: str
    direction: str
    mean: float
    sd: float | None
    per_fold: list[float | None]
    flags: list[str] = field(default_factory=list)


def aggregate(measure, resample_result, mode: str = MACRO) -> AggregatedMeasure:
    """Macro: score each fold then mean/sd. Micro: score pooled predictions once."""
    measure = get_measure(measure)
    task = resample_result.task
    positive = task.positive_index
    if mode == MICRO:
        if not measure.supports_micro:
            raise ValueError(f"{measure.id} does not support micro aggregation")
        pooled = pool_predictions([it.prediction for it in resample_result.iterations])
        truth = task.target_column.values[pooled.row_ids]
        ctx = ScoreContext()
        try:
            value = evaluate_measure(measure, pooled, truth, positive, ctx)
        except MeasureError as exc:
            ctx.flags.append(str(exc))
            value = float("nan")
        return AggregatedMeasure(measure.id, MICRO, measure.direction, value, None, [], ctx.flags)
    if mode != MACRO:
        raise ValueError(f"unknown aggregation mode {mode!r}")
    per_fold: list[float | None] = []
    flags: list[str] = []
    for it in resample_result.iterations:
        ctx = ScoreContext()
        try:
            per_fold.append(evaluate_measure(measure, it.prediction, resample_result.truth(it), positive, ctx))
        except MeasureError as exc:
            per_fold.append(None)
            flags.append(f"fold {it.index}: {exc}")
            warnings.warn(f"{measure.id} NA in fold {it.index}: {exc}", AggregationWarning, stacklevel=2)
        flags.extend(f"fold {it.index}: {f}" for f in ctx.flags)
    mean, sd, single = mean_sd(per_fold)
    if single:
        flags.append("single scorable fold, sd set to 0")
    return AggregatedMeasure(measure.id, MACRO, measure.direction, mean, sd, per_fold, flags)


@dataclass
class ConfusionMatrix:
    levels: tuple[str, ...]
    counts: np.ndarray  # rows = true class, columns = predicted class

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        if self.levels != other.levels:
            raise ValueError("confusion matrices over different levels")
        return ConfusionMatrix(self.levels, self.counts + other.counts)


def confusion(labels, truth, levels) -> ConfusionMatrix:
    k = len(levels)
    counts = np.zeros((k, k), dtype=np.int64)
    np.add.at(counts, (np.asarray(truth, dtype=np.int64), np.asarray(labels, dtype=np.int64)), 1)
    return ConfusionMatrix(tuple(levels), counts)
