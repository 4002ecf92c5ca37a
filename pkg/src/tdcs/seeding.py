"""Deterministic sub-seed derivation.

Every stochastic component (partition search trials, per-point noise, fading
draws) derives its generator from (master seed, integer key...) so that
serial and parallel execution orders produce identical results.
"""
from __future__ import annotations

import numpy as np


def derive_seed(master: int, *key: int) -> int:
    """Stable 64-bit sub-seed for a (master, key...) tuple."""
    if master < 0 or any(k < 0 for k in key):
        raise ValueError("seeds and key fields must be non-negative")
    ss = np.random.SeedSequence([int(master), *[int(k) for k in key]])
    return int(ss.generate_state(1, np.uint64)[0])


def derive_rng(master: int, *key: int) -> np.random.Generator:
    """Generator seeded from derive_seed(master, *key)."""
    return np.random.default_rng(derive_seed(master, *key))
