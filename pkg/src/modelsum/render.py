"""Text and JSON rendering of a SummaryReport."""

from __future__ import annotations

import json
import math

import numpy as np

from modelsum.control import PARAGRAPHS
from modelsum.effects import RESPONSE_CLASS
from modelsum.metrics import MAXIMIZE
from modelsum.residuals import CONFUSION_KIND

MIN_WIDTH = 40
DEFAULT_WIDTH = 80

ARROW = {MAXIMIZE: "↑", "minimize": "↓"}
GLYPHS = "▁▂▃▄▅▆▇█"


def fmt(value, digits: int) -> str:
    if value is None or (isinstance(value, float) and math.isnan(value)):
        return "NA"
    return f"{float(value):.{digits}g}"


def glyph_strip(values) -> str:
    """One glyph per grid point, quantized into 8 levels over the curve's range."""
    values = np.asarray(values, dtype=float)
    lo, hi = float(values.min()), float(values.max())
    if hi - lo <= 1e-12 * max(1.0, abs(hi), abs(lo)):
        return GLYPHS[0] * len(values)
    idx = np.clip(((values - lo) / (hi - lo) * len(GLYPHS)).astype(int), 0, len(GLYPHS) - 1)
    return "".join(GLYPHS[i] for i in idx)


def signed_bars(values) -> str:
    """Per level: sign then a magnitude glyph, relative to the mean over levels."""
    values = np.asarray(values, dtype=float)
    values = values - values.mean() if len(values) else values
    top = float(np.max(np.abs(values))) if len(values) else 0.0
    parts = []
    for v in values:
        if top == 0 or abs(v) <= 1e-12 * top:
            parts.append("0" + GLYPHS[0])
            continue
        level = min(int(abs(v) / top * len(GLYPHS)), len(GLYPHS) - 1)
        parts.append(("+" if v > 0 else "-") + GLYPHS[level])
    return " ".join(parts)


def _table(header: list[str], rows: list[list[str]], left_cols: int = 1) -> list[str]:
    widths = [max(len(r[i]) for r in [header] + rows) for i in range(len(header))]
    out = []
    for r in [header] + rows:
        cells = [
            c.ljust(w) if i < left_cols else c.rjust(w)
            for i, (c, w) in enumerate(zip(r, widths))
        ]
        out.append("  ".join(cells).rstrip())
    return out


def _general_lines(report) -> list[str]:
    g = report.general
    t = g["task"]
    lines = [f"Task: {t['id']} ({t['task_type'].replace('_', ' ')}), target: {t['target']}"]
    if t["positive_class"] is not None:
        lines[-1] += f", positive class: {t['positive_class']}"
    lines.append(
        f"Observations: {t['n']}, features: {t['p']} "
        f"(numeric: {t['n_numeric']}, categorical: {t['n_categorical']})"
    )
    lr = g["learner"]
    lines.append(f"Learner: {lr['id']} (predict type: {lr['predict_type']})")
    if lr["hyperparameters"]:
        lines.append("Hyperparameters: " + ", ".join(f"{k}={v}" for k, v in lr["hyperparameters"]))
    rs = g["resampling"]
    lines.append(f"Resampling: {rs['description']}, {rs['iterations']} iterations")
    return lines


def _residual_lines(report, d) -> list[str]:
    r = report.residuals
    if r.kind == CONFUSION_KIND:
        levels = list(r.confusion.levels)
        rows = [[lvl] + [str(int(c)) for c in r.confusion.counts[i]] for i, lvl in enumerate(levels)]
        return ["(confusion matrix, rows = truth, columns = prediction)"] + _table(["truth"] + levels, rows)
    q = r.quantiles
    header = ["Min", "Q25", "Median", "Q75", "Max"]
    values = [fmt(q[k], d) for k in ("min", "q25", "median", "q75", "max")]
    return _table(header, [values], left_cols=0)


def performance_line(label: str, direction: str, mean, sd, digits: int, width: int = 0) -> str:
    sd_text = "" if sd is None else f" [{fmt(sd, digits)}]"
    return f"{label.ljust(width)} {ARROW[direction]}  {fmt(mean, digits)}{sd_text}"


def _performance_lines(report, d) -> list[str]:
    labels = [f"{m.id} ({m.mode})" for m in report.performance]
    width = max((len(x) for x in labels), default=0)
    return [
        performance_line(lbl, m.direction, m.mean, m.sd, d, width)
        for lbl, m in zip(labels, report.performance)
    ]


def _mean_sd_lines(summary, names, d, arrows=None) -> list[str]:
    width = max((len(n) for n in names), default=0)
    lines = []
    for n in names:
        arrow = f" {arrows}" if arrows else ""
        lines.append(f"{n.ljust(width)}{arrow}  {fmt(summary.mean[n], d)} [{fmt(summary.sd[n], d)}]")
    return lines


def _importance_lines(report, d) -> list[str]:
    imp = report.importance
    rows = [
        [row.feature] + [f"{fmt(row.mean[m], d)} [{fmt(row.sd[m], d)}]" for m in imp.measures]
        for row in imp.rows
    ]
    lines = _table(["feature"] + imp.measures, rows)
    if imp.n_features > len(imp.rows):
        lines.append(f"({imp.n_features - len(imp.rows)} less important features not shown)")
    return lines


def _effects_lines(report, width) -> list[str]:
    eff = report.effects
    lines = []
    name_w = max((len(f) for f in eff.features), default=7)
    for cls in eff.classes:
        if cls != RESPONSE_CLASS:
            lines.append(f"class: {cls}")
        strips = {}
        for f in eff.features:
            for m in eff.methods:
                curve = eff.curves[(f, m, cls)]
                strips[(f, m)] = signed_bars(curve.values) if curve.grid.is_categorical else glyph_strip(curve.values)
        col_w = {m: max([len(m)] + [len(strips[(f, m)]) for f in eff.features]) for m in eff.methods}
        header = "feature".ljust(name_w) + "".join("  " + m.rjust(col_w[m]) for m in eff.methods)
        lines.append(header.rstrip())
        for f in eff.features:
            line = f.ljust(name_w) + "".join("  " + strips[(f, m)].rjust(col_w[m]) for m in eff.methods)
            lines.append(line)
    return lines


def render_text(report, width: int = DEFAULT_WIDTH) -> str:
    """Console report; deterministic for a given report."""
    if width < MIN_WIDTH:
        raise ValueError(f"width must be at least {MIN_WIDTH}")
    d = report.control.digits
    blocks = []
    for name in report.paragraph_names():
        if name == "general":
            blocks.append(["General:"] + _general_lines(report))
        elif name == "residuals":
            blocks.append([f"Residuals ({report.residuals.kind}, held-out, pooled over {report.n_iterations} iterations):"]
                          + _residual_lines(report, d))
        elif name == "performance":
            blocks.append(["Performance [sd]:"] + _performance_lines(report, d))
        elif name == "complexity":
            blocks.append(["Complexity [sd]:"] + _mean_sd_lines(report.complexity, report.complexity.measures, d))
        elif name == "fairness":
            fa = report.fairness
            blocks.append([f"Fairness [sd] (protected attribute: {fa.protected_attribute}):"]
                          + _mean_sd_lines(fa, fa.measures, d, arrows=ARROW["minimize"]))
        elif name == "importance":
            blocks.append(["Importance [sd]:"] + _importance_lines(report, d))
        elif name == "effects":
            blocks.append(["Effects:"] + _effects_lines(report, width))
    return "\n\n".join("\n".join(b) for b in blocks) + "\n"


def _num(x):
    if x is None:
        return None
    x = float(x)
    return None if math.isnan(x) or math.isinf(x) else x


def _nums(xs):
    return [_num(x) for x in xs]


def _curve_json(curve, folds):
    out = {
        "values": _nums(curve.values),
        "sd": _nums(curve.sd) if curve.sd is not None else None,
        "n_folds": curve.n_folds,
        "flags": list(curve.flags),
        "folds": [_nums(c.values) for c in folds],
    }
    if curve.counts is not None:
        out["counts"] = [int(c) for c in curve.counts]
    return out


def report_dict(report) -> dict:
    hidden = report.control.hide
    out = {"general": report.general}
    r = report.residuals
    res = {"hidden": "residuals" in hidden, "kind": r.kind, "n": r.n}
    if r.kind == CONFUSION_KIND:
        res["levels"] = list(r.confusion.levels)
        res["counts"] = r.confusion.counts.tolist()
    else:
        res["quantiles"] = {k: _num(v) for k, v in r.quantiles.items()}
    out["residuals"] = res
    out["performance"] = {
        "hidden": "performance" in hidden,
        "measures": [
            {"id": m.id, "mode": m.mode, "direction": m.direction, "mean": _num(m.mean),
             "sd": _num(m.sd), "per_fold": _nums(m.per_fold), "flags": list(m.flags)}
            for m in report.performance
        ],
    }
    c = report.complexity
    out["complexity"] = {
        "hidden": "complexity" in hidden,
        **{m: {"mean": _num(c.mean[m]), "sd": _num(c.sd[m]), "per_fold": _nums(c.per_fold[m])} for m in c.measures},
        "flags": list(c.flags),
    }
    if report.fairness is not None:
        fa = report.fairness
        out["fairness"] = {
            "hidden": "fairness" in hidden,
            "protected_attribute": fa.protected_attribute,
            "groups": fa.groups,
            "measures": [
                {"id": m, "mean": _num(fa.mean[m]), "sd": _num(fa.sd[m]), "per_fold": _nums(fa.per_fold[m])}
                for m in fa.measures
            ],
            "flags": list(fa.flags),
        }
    imp = report.importance
    out["importance"] = {
        "hidden": "importance" in hidden,
        "measures": imp.measures,
        "n_features": imp.n_features,
        "rows": [
            {"feature": row.feature,
             **{m: {"mean": _num(row.mean[m]), "sd": _num(row.sd[m]), "per_fold": _nums(row.per_fold[m])}
                for m in imp.measures}}
            for row in imp.rows
        ],
        "flags": list(imp.flags),
    }
    eff = report.effects
    features = []
    for f in eff.features:
        any_curve = eff.curves[(f, eff.methods[0] if eff.methods else "pdp", eff.classes[0])]
        grid = any_curve.grid
        entry = {
            "feature": f,
            "kind": grid.kind,
            "grid": list(grid.labels) if grid.is_categorical else _nums(grid.values),
            "degenerate": grid.degenerate,
            "curves": [
                {"method": m, "class": cls, **_curve_json(eff.curves[(f, m, cls)], eff.fold_curves[(f, m, cls)])}
                for cls in eff.classes for m in eff.methods
            ],
        }
        features.append(entry)
    out["effects"] = {"hidden": "effects" in hidden, "classes": eff.classes, "methods": eff.methods,
                      "features": features}
    out["control"] = report.control.to_dict()
    ordered = {k: out[k] for k in PARAGRAPHS + ("control",) if k in out}
    return ordered


def render_json(report) -> str:
    """Canonical JSON: fixed key order, full-precision floats, NA as null."""
    return json.dumps(report_dict(report), indent=2, ensure_ascii=False, allow_nan=False, default=_default) + "\n"


def _default(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return _num(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")
