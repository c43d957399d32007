"""The summary orchestrator: every paragraph from a fitted model and a resample result.

Only the General paragraph looks at the fitted model; everything else is
computed per fold on held-out rows with that fold's model, then aggregated.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np

from modelsum import _rng
from modelsum.complexity import (
    ComplexityRecord,
    ComplexitySummary,
    aggregate_complexity,
    fold_complexity,
)
from modelsum.control import PARAGRAPHS, SummaryControl
from modelsum.effects import (
    ALE,
    MAX_EFFECT_ROWS,
    PDP,
    EffectCurve,
    aggregate_effects,
    ale_from_outputs,
    build_grid,
    effect_classes,
    grid_outputs,
    pdp_from_outputs,
)
from modelsum.fairness import FairnessSummary, default_fairness_measures, resolve_protected, summarize_fairness
from modelsum.importance import (
    PDP_IMPORTANCE,
    ImportanceTable,
    default_importance_measures,
    importance_table,
    pdp_importance,
    pfi_matrix,
    pfi_measure_id,
)
from modelsum.learners import hyperparameter_summary
from modelsum.metrics import (
    MACRO,
    MICRO,
    AggregatedMeasure,
    aggregate,
    default_measures,
    get_measure,
)
from modelsum.parallel import run_tasks
from modelsum.residuals import ResidualSummary, summarize_residuals


class SummaryError(RuntimeError):
    pass


@dataclass
class EffectsParagraph:
    classes: list[str]
    methods: list[str]
    features: list[str]  # display order
    curves: dict[tuple[str, str, str], EffectCurve]  # (feature, method, class) -> aggregate
    fold_curves: dict[tuple[str, str, str], list[EffectCurve]]


@dataclass
class SummaryReport:
    general: dict[str, Any]
    residuals: ResidualSummary
    performance: list[AggregatedMeasure]
    complexity: ComplexitySummary
    importance: ImportanceTable
    effects: EffectsParagraph
    fairness: FairnessSummary | None
    control: SummaryControl
    n_iterations: int

    def paragraph_names(self) -> list[str]:
        """Paragraphs that would be rendered, in order."""
        names = []
        for name in PARAGRAPHS:
            if name == "fairness" and self.fairness is None:
                continue
            if name in self.control.hide:
                continue
            names.append(name)
        return names


def _parse_measure_entry(entry: str) -> tuple[str, str]:
    name, _, mode = entry.partition(":")
    mode = mode or MACRO
    if mode not in (MACRO, MICRO):
        raise SummaryError(f"unknown aggregation {mode!r} in measure {entry!r}")
    return name, mode


def _general(model, resample_result) -> dict[str, Any]:
    task = resample_result.task
    learner = model.learner
    return {
        "task": task.describe(),
        "protected_attribute": task.protected_attribute,
        "learner": {
            "id": learner.id,
            "predict_type": model.predict_type,
            "hyperparameters": [[k, v] for k, v in hyperparameter_summary(learner)],
        },
        "resampling": {
            "strategy": resample_result.strategy.spec(),
            "description": resample_result.strategy.describe(),
            "iterations": resample_result.n_iterations,
        },
    }


def _fold_work(model, X, truth, positive, grids, columns, classes, pfi_measures,
               repetitions, seed, fold, want_complexity):
    """Effects, PFI and complexity for one fold (runs inside a pool worker)."""
    n = X.shape[0]
    rows = np.arange(n)
    if n > MAX_EFFECT_ROWS:
        rows = np.sort(_rng.derive_rng(seed, _rng.SUBSAMPLE, fold).choice(n, MAX_EFFECT_ROWS, replace=False))
    Xe = X[rows]
    curves: dict[tuple[str, str, str], EffectCurve] = {}
    for grid, j in zip(grids, columns):
        M = grid_outputs(model, Xe, j, grid)
        for cls, k in classes:
            Mk = np.ascontiguousarray(M[:, :, k])
            curves[(grid.feature, PDP, cls)] = pdp_from_outputs(Mk, grid, cls, fold)
            curves[(grid.feature, ALE, cls)] = ale_from_outputs(Mk, Xe[:, j], grid, cls, fold)
    pfi = {}
    for imp_id in pfi_measures:
        values = pfi_matrix(model, X, truth, pfi_measure_id(imp_id), repetitions, seed, fold, positive, columns)
        pfi[imp_id] = {g.feature: float(v) for g, v in zip(grids, values.mean(axis=1))}
    record = None
    if want_complexity:
        outputs = model.raw(Xe)[:, [k for _, k in classes]]
        ale_by_class = [[curves[(g.feature, ALE, cls)] for g in grids] for cls, _ in classes]
        sp, ias = fold_complexity(outputs, ale_by_class, Xe, columns)
        record = ComplexityRecord(fold, sp, ias)
    return curves, pfi, record


def summarize(model, resample_result, control: SummaryControl | None = None, workers: int | None = None) -> SummaryReport:
    """Build the full report. ``workers`` sizes the per-fold process pool."""
    control = control or SummaryControl()
    if not resample_result.models_stored:
        raise SummaryError("resample result has no stored models; re-run resample with store_models=True")
    if model.learner != resample_result.learner:
        raise SummaryError(
            f"model learner {model.learner} does not match the resampled learner {resample_result.learner}"
        )
    task = resample_result.task
    if tuple(model.feature_names) != tuple(task.feature_names):
        raise SummaryError("model features differ from the resampled task's features")
    from modelsum.resampling import default_workers

    workers = workers if workers is not None else default_workers()

    general = _general(model, resample_result)
    residual_summary = summarize_residuals(resample_result)

    first_pred = resample_result.iterations[0].prediction
    if control.measures is None:
        entries = [(m.id, MACRO) for m in default_measures(task.task_type) if m.applicable(first_pred)]
    else:
        entries = [_parse_measure_entry(e) for e in control.measures]
        for name, _ in entries:
            m = get_measure(name)
            if not m.applicable(first_pred):
                raise SummaryError(f"measure {name!r} not applicable to these predictions")
    performance = [aggregate(get_measure(name), resample_result, mode) for name, mode in entries]

    importance_ids = list(control.importance_measures or default_importance_measures(task.task_type))
    for imp in importance_ids:
        if imp != PDP_IMPORTANCE:
            if task.task_type not in get_measure(pfi_measure_id(imp)).task_types:
                raise SummaryError(f"importance measure {imp!r} does not apply to {task.task_type}")
    pfi_ids = [m for m in importance_ids if m != PDP_IMPORTANCE]

    grids = [build_grid(task, f, control.grid_size) for f in task.feature_names]
    columns = list(range(len(grids)))
    classes = effect_classes(task)
    positive = task.positive_index
    jobs = []
    for it in resample_result.iterations:
        X = it.model.encoder.encode(task.frame.take(it.test))
        jobs.append((
            _fold_work,
            (it.model, X, resample_result.truth(it), positive, grids, columns, classes, pfi_ids,
             control.pfi_repetitions, resample_result.seed, it.index, True),
        ))
    results = run_tasks(jobs, workers)

    fold_curves: dict[tuple[str, str, str], list[EffectCurve]] = {}
    for curves, _, _ in results:
        for key, curve in curves.items():
            fold_curves.setdefault(key, []).append(curve)
    agg_curves = {key: aggregate_effects(cs) for key, cs in fold_curves.items()}

    per_fold: dict[str, list[dict[str, float]]] = {}
    if PDP_IMPORTANCE in importance_ids:
        per_fold[PDP_IMPORTANCE] = []
        for curves, _, _ in results:
            per_fold[PDP_IMPORTANCE].append({
                g.feature: float(np.mean([pdp_importance(curves[(g.feature, PDP, cls)]) for cls, _ in classes]))
                for g in grids
            })
    for imp in pfi_ids:
        per_fold[imp] = [pfi[imp] for _, pfi, _ in results]
    importance = importance_table(per_fold, importance_ids, control.n_important)

    complexity = aggregate_complexity([rec for _, _, rec in results], control.complexity_measures)

    if importance.rows:
        display = [r.feature for r in importance.rows]
    else:
        display = list(task.feature_names)[: control.n_important]
    effects = EffectsParagraph(
        classes=[cls for cls, _ in classes],
        methods=list(control.effect_measures),
        features=display,
        curves=agg_curves,
        fold_curves=fold_curves,
    )

    fairness = None
    protected = resolve_protected(task, control)
    if protected is not None:
        fmeasures = list(control.fairness_measures or default_fairness_measures(task.task_type))
        fairness = summarize_fairness(resample_result, protected, fmeasures)

    return SummaryReport(
        general=general,
        residuals=residual_summary,
        performance=performance,
        complexity=complexity,
        importance=importance,
        effects=effects,
        fairness=fairness,
        control=control,
        n_iterations=resample_result.n_iterations,
    )
