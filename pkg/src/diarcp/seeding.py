"""Deterministic seed derivation for repetitions, restarts, and sweep cells."""

from __future__ import annotations

import numpy as np

_MASK = 2**32 - 1


def derive_seed(*parts: int) -> int:
    """Mix integer key parts into a reproducible 32-bit seed.

    Stable across processes and platforms (unlike built-in hash), so sweep
    cells and repetitions can be executed in any order or in parallel.
    """
    entropy = [int(p) & _MASK for p in parts]
    return int(np.random.SeedSequence(entropy).generate_state(1, np.uint32)[0])


def derive_rng(*parts: int) -> np.random.Generator:
    """Generator seeded from the mixed key parts."""
    entropy = [int(p) & _MASK for p in parts]
    return np.random.default_rng(np.random.SeedSequence(entropy))
