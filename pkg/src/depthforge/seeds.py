"""Splittable 64-bit seeding so parallel generation never depends on scheduling."""

from __future__ import annotations

import numpy as np

MASK64 = (1 << 64) - 1

# splitmix64 finalizer constants
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
_GOLDEN = 0x9E3779B97F4A7C15


def mix64(x: int) -> int:
    """Avalanche a 64-bit integer (splitmix64 finalizer)."""
    x = (x + _GOLDEN) & MASK64
    x ^= x >> 30
    x = (x * _M1) & MASK64
    x ^= x >> 27
    x = (x * _M2) & MASK64
    x ^= x >> 31
    return x


def derive_seed(master_seed: int, index: int) -> int:
    """Per-item seed; a pure function of (master_seed, index)."""
    return mix64((master_seed ^ index) & MASK64)


def make_rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed & MASK64))
