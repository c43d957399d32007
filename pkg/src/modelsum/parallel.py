"""Process pool used for fold- and feature-level work.

Results always come back in submission order, so aggregation never depends
on scheduling.
"""

from __future__ import annotations

from joblib import Parallel, delayed


def run_tasks(jobs, workers: int = 1):
    """Run ``[(fn, args), ...]`` and return results in job order."""
    if workers <= 1 or len(jobs) <= 1:
        return [fn(*args) for fn, args in jobs]
    n_jobs = min(workers, len(jobs))
    return Parallel(n_jobs=n_jobs, backend="loky")(delayed(fn)(*args) for fn, args in jobs)
