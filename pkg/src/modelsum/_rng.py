"""Seed derivation shared by every stochastic step.

Each stream is keyed by the master seed plus a tuple of integers (stage tag,
fold, feature, repetition, ...). ``SeedSequence`` hashes the key, so streams
are independent of the order in which work is scheduled.
"""

from __future__ import annotations

import numpy as np

SPLIT = 0
FIT = 1
PFI = 2
SUBSAMPLE = 3
SIMULATE = 4


def derive_rng(seed: int, *keys: int) -> np.random.Generator:
    seq = np.random.SeedSequence(int(seed) & 0xFFFFFFFFFFFFFFFF, spawn_key=tuple(int(k) for k in keys))
    return np.random.Generator(np.random.PCG64(seq))


def derive_seed(seed: int, *keys: int) -> int:
    """A 63-bit integer seed for a keyed substream."""
    seq = np.random.SeedSequence(int(seed) & 0xFFFFFFFFFFFFFFFF, spawn_key=tuple(int(k) for k in keys))
    return int(seq.generate_state(2, dtype=np.uint32).view(np.uint64)[0] >> np.uint64(1))
