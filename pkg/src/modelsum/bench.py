"""Runtime scaling benchmark over a grid of (n, p) cells."""

from __future__ import annotations

import csv
import itertools
import logging
import re
import statistics
import time
from dataclasses import dataclass, field

from modelsum.learners import learner_spec, parse_learner
from modelsum.learners.base import fit
from modelsum.resampling import parse_strategy, resample
from modelsum.simulate import simulate
from modelsum.summary import summarize
from modelsum.tabular import make_task

log = logging.getLogger(__name__)

CSV_COLUMNS = ["n", "p", "learner", "workers", "run", "seconds", "resample_seconds", "raw_seconds"]


@dataclass
class BenchCell:
    n: int
    p: int
    learner: str
    workers: int
    timings: list[float] = field(default_factory=list)
    resample_seconds: float | None = None
    error: str | None = None

    @property
    def seconds(self) -> float | None:
        return statistics.median(self.timings) if self.timings and self.error is None else None


def parse_grid(text: str) -> tuple[list[int], list[int]]:
    """``n=50,100;p=5,10`` -> ([50, 100], [5, 10])."""
    parts = {}
    for chunk in text.split(";"):
        key, eq, values = chunk.partition("=")
        if not eq or key.strip() not in ("n", "p"):
            raise ValueError(f"malformed grid part {chunk!r}")
        parts[key.strip()] = [int(v) for v in re.split(r"[,\s]+", values.strip()) if v]
    if set(parts) != {"n", "p"} or not parts["n"] or not parts["p"]:
        raise ValueError("grid needs both n=... and p=...")
    return parts["n"], parts["p"]


def run_cell(n, p, learner, workers, repeats=3, seed=0, resampling="cv3") -> BenchCell:
    cell = BenchCell(n, p, learner_spec(learner), workers)
    try:
        task = make_task(simulate(n, p, seed), "y", id=f"sim_n{n}_p{p}")
        t0 = time.perf_counter()
        rr = resample(task, learner, parse_strategy(resampling), workers=workers, seed=seed)
        cell.resample_seconds = time.perf_counter() - t0
        model = fit(learner, task, seed=seed)
        for _ in range(repeats):
            t0 = time.perf_counter()
            summarize(model, rr, workers=workers)
            cell.timings.append(time.perf_counter() - t0)
    except Exception as exc:  # a failing cell is recorded, the run continues
        log.warning("bench cell n=%s p=%s %s failed: %s", n, p, cell.learner, exc)
        cell.error = str(exc)
    return cell


def run_bench(ns, ps, learners, workers_list, repeats=3, seed=0) -> list[BenchCell]:
    cells = []
    for n, p, lrn, w in itertools.product(ns, ps, learners, workers_list):
        learner = parse_learner(lrn) if isinstance(lrn, str) else lrn
        log.info("bench n=%d p=%d learner=%s workers=%d", n, p, learner_spec(learner), w)
        cells.append(run_cell(n, p, learner, w, repeats, seed))
    return cells


def write_bench_csv(cells: list[BenchCell], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for c in cells:
            writer.writerow([
                c.n, c.p, c.learner, c.workers, len(c.timings),
                "NA" if c.seconds is None else repr(c.seconds),
                "NA" if c.resample_seconds is None else repr(c.resample_seconds),
                ";".join(repr(t) for t in c.timings),
            ])
