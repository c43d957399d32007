"""Synthetic regression data for the runtime study.

y = 4*x1 + 4*x2 + 4*x4*x3**2 + e, with e ~ N(0, sd = noise * f(x)).
x1..x3 ~ U(0, 1), x4 ~ Bernoulli(0.75) coded 0/1, x5 categorical with five
equally likely levels, x6..xp ~ N(0, 1) noise features.
"""

from __future__ import annotations

import numpy as np

from modelsum import _rng
from modelsum.tabular import Column, Frame

X5_LEVELS = ("a", "b", "c", "d", "e")
DEFAULT_NOISE = 0.1


def signal(x1, x2, x3, x4):
    return 4 * x1 + 4 * x2 + 4 * x4 * x3**2


def simulate(n: int, p: int, seed: int = 0, noise: float = DEFAULT_NOISE) -> Frame:
    if p < 5:
        raise ValueError("p must be at least 5")
    if n < 1:
        raise ValueError("n must be at least 1")
    if noise < 0:
        raise ValueError("noise must be >= 0")
    rng = _rng.derive_rng(seed, _rng.SIMULATE)
    x1, x2, x3 = (rng.uniform(0.0, 1.0, n) for _ in range(3))
    x4 = (rng.uniform(0.0, 1.0, n) < 0.75).astype(np.float64)
    x5 = rng.integers(0, len(X5_LEVELS), n)
    extra = rng.standard_normal((n, p - 5))
    f = signal(x1, x2, x3, x4)
    # f >= 0 for this process; the clamp only guards the scale argument
    y = f + rng.standard_normal(n) * (noise * np.maximum(f, 0.0))
    cols = [
        Column.numeric("x1", x1),
        Column.numeric("x2", x2),
        Column.numeric("x3", x3),
        Column.numeric("x4", x4),
        Column("x5", "categorical", x5, X5_LEVELS),
    ]
    cols += [Column.numeric(f"x{j}", extra[:, j - 6]) for j in range(6, p + 1)]
    cols.append(Column.numeric("y", y))
    return Frame(tuple(cols))
