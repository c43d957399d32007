"""Learner zoo: featureless, linear, logistic, tree, random_forest."""

from __future__ import annotations

from typing import Any

from modelsum.learners.base import (
    PROBABILITY,
    RESPONSE,
    FitError,
    FittedModel,
    FitWarning,
    Learner,
    Prediction,
    fit,
    hard_labels,
    hyperparameter_summary,
)
from modelsum.learners.linear import Featureless, Linear, Logistic
from modelsum.learners.trees import EnsembleModel, RandomForest, Tree

REGISTRY = {algo.id: algo for algo in (Featureless, Linear, Logistic, Tree, RandomForest)}


def _parse_value(text: str) -> Any:
    lowered = text.lower()
    if lowered in ("true", "false"):
        return lowered == "true"
    if lowered in ("none", "null"):
        return None
    for cast in (int, float):
        try:
            return cast(text)
        except ValueError:
            pass
    return text


def make_learner(id: str, predict_type: str | None = None, **params) -> Learner:
    if id not in REGISTRY:
        raise ValueError(f"unknown learner {id!r}; choose from {sorted(REGISTRY)}")
    if predict_type not in (None, RESPONSE, PROBABILITY):
        raise ValueError(f"unknown predict_type {predict_type!r}")
    defaults = REGISTRY[id].defaults
    unknown = set(params) - set(defaults)
    if unknown:
        raise ValueError(f"unknown hyperparameter(s) for {id}: {sorted(unknown)}")
    ordered = tuple((k, params[k]) for k in defaults if k in params)
    return Learner(id, ordered, predict_type)


def parse_learner(spec: str) -> Learner:
    """Parse ``name[:key=value,...]``, e.g. ``random_forest:num_trees=100``."""
    name, _, rest = spec.partition(":")
    params: dict[str, Any] = {}
    predict_type = None
    if rest:
        for item in rest.split(","):
            key, eq, value = item.partition("=")
            if not eq:
                raise ValueError(f"malformed learner option {item!r} in {spec!r}")
            key = key.strip()
            if key == "predict_type":
                predict_type = value.strip()
            else:
                params[key] = _parse_value(value.strip())
    return make_learner(name.strip(), predict_type, **params)


def learner_spec(learner: Learner) -> str:
    parts = [f"{k}={v}" for k, v in learner.params]
    if learner.predict_type is not None:
        parts.append(f"predict_type={learner.predict_type}")
    return learner.id + (":" + ",".join(parts) if parts else "")


__all__ = [
    "REGISTRY",
    "Learner",
    "FittedModel",
    "EnsembleModel",
    "Prediction",
    "FitError",
    "FitWarning",
    "PROBABILITY",
    "RESPONSE",
    "fit",
    "hard_labels",
    "hyperparameter_summary",
    "make_learner",
    "parse_learner",
    "learner_spec",
]
