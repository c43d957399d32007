"""Summary configuration and its JSON control-file form."""

from __future__ import annotations

import json
from dataclasses import dataclass, fields

from modelsum.complexity import DEFAULT_COMPLEXITY
from modelsum.effects import ALE, DEFAULT_GRID_SIZE, PDP
from modelsum.importance import DEFAULT_REPETITIONS

PARAGRAPHS = ("general", "residuals", "performance", "complexity", "fairness", "importance", "effects")
HIDABLE = frozenset(PARAGRAPHS) - {"general"}

DEFAULT_DIGITS = 4
DEFAULT_N_IMPORTANT = 15


class ControlError(ValueError):
    pass


@dataclass(frozen=True)
class SummaryControl:
    """What the summary computes and shows.

    ``None`` for measures, importance_measures or fairness_measures means
    task-type defaults. A measure id may carry a ``:micro`` suffix.
    """

    measures: tuple[str, ...] | None = None
    complexity_measures: tuple[str, ...] = DEFAULT_COMPLEXITY
    importance_measures: tuple[str, ...] | None = None
    n_important: int = DEFAULT_N_IMPORTANT
    effect_measures: tuple[str, ...] = (PDP, ALE)
    fairness_measures: tuple[str, ...] | None = None
    protected_attribute: str | None = None
    hide: frozenset[str] = frozenset()
    digits: int = DEFAULT_DIGITS
    grid_size: int = DEFAULT_GRID_SIZE
    pfi_repetitions: int = DEFAULT_REPETITIONS

    def __post_init__(self):
        for name in ("measures", "importance_measures", "fairness_measures"):
            value = getattr(self, name)
            if value is not None:
                object.__setattr__(self, name, tuple(value))
        object.__setattr__(self, "complexity_measures", tuple(self.complexity_measures))
        object.__setattr__(self, "effect_measures", tuple(self.effect_measures))
        object.__setattr__(self, "hide", frozenset(self.hide))
        if self.n_important < 1:
            raise ControlError("n_important must be >= 1")
        if self.digits < 1:
            raise ControlError("digits must be >= 1")
        if self.grid_size < 2:
            raise ControlError("grid_size must be >= 2")
        if self.pfi_repetitions < 1:
            raise ControlError("pfi_repetitions must be >= 1")
        bad = self.hide - HIDABLE
        if bad:
            raise ControlError(f"cannot hide {sorted(bad)}; hidable paragraphs: {sorted(HIDABLE)}")
        bad = set(self.complexity_measures) - set(DEFAULT_COMPLEXITY)
        if bad:
            raise ControlError(f"unknown complexity measure(s) {sorted(bad)}")
        bad = set(self.effect_measures) - {PDP, ALE}
        if bad:
            raise ControlError(f"unknown effect measure(s) {sorted(bad)}")

    def to_dict(self) -> dict:
        out = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, frozenset):
                value = sorted(value)
            elif isinstance(value, tuple):
                value = list(value)
            out[f.name] = value
        return out


def summary_control(**kwargs) -> SummaryControl:
    return SummaryControl(**kwargs)


def control_from_dict(data: dict) -> SummaryControl:
    known = {f.name for f in fields(SummaryControl)}
    unknown = set(data) - known
    if unknown:
        raise ControlError(f"unknown control key(s) {sorted(unknown)}")
    return SummaryControl(**data)


def load_control(path) -> SummaryControl:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise ControlError("control file must hold a JSON object")
    return control_from_dict(data)
