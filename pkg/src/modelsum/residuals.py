"""Held-out residuals and their pooled five-number summary."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from modelsum.learners import Prediction
from modelsum.metrics import ConfusionMatrix, confusion
from modelsum.tabular import BINARY, REGRESSION

REGRESSION_KIND = "regression"
PROBABILITY_KIND = "probability"
CONFUSION_KIND = "confusion"

QUANTILE_PROBS = (0.0, 0.25, 0.5, 0.75, 1.0)


def residuals(prediction: Prediction, truth, task_type: str, positive: int | None = None):
    """Regression: y - yhat. Probabilities: p - onehot(y), positive-class
    component only for binary tasks, all components (row-major) otherwise.
    Hard labels: a confusion matrix.
    """
    truth = np.asarray(truth)
    if task_type == REGRESSION:
        return truth - prediction.response
    if prediction.prob is None:
        return confusion(prediction.labels, truth, prediction.class_levels)
    onehot = np.zeros_like(prediction.prob)
    onehot[np.arange(len(truth)), truth] = 1.0
    diff = prediction.prob - onehot
    if task_type == BINARY:
        return diff[:, positive]
    return diff.ravel()


@dataclass
class ResidualSummary:
    kind: str
    quantiles: dict[str, float] | None = None
    confusion: ConfusionMatrix | None = None
    n: int = 0


def five_numbers(values) -> dict[str, float]:
    q = np.quantile(np.asarray(values, dtype=float), QUANTILE_PROBS, method="linear")
    return dict(zip(("min", "q25", "median", "q75", "max"), (float(v) for v in q)))


def summarize_residuals(resample_result) -> ResidualSummary:
    task = resample_result.task
    parts = [
        residuals(it.prediction, resample_result.truth(it), task.task_type, task.positive_index)
        for it in resample_result.iterations
    ]
    if isinstance(parts[0], ConfusionMatrix):
        total = parts[0]
        for cm in parts[1:]:
            total = total + cm
        return ResidualSummary(CONFUSION_KIND, confusion=total, n=total.total)
    pooled = np.concatenate(parts)
    kind = REGRESSION_KIND if task.task_type == REGRESSION else PROBABILITY_KIND
    return ResidualSummary(kind, quantiles=five_numbers(pooled), n=len(pooled))
