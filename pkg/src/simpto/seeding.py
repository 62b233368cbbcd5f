"""Counter-based random streams.

Every uniform draw is a pure function of ``(base_seed, *indices, draw_index)``,
so results do not depend on the order in which grid cells or repetitions run.
The mixer is the SplitMix64 finaliser; the compiled kernel reimplements the
same arithmetic and must stay bit-identical with this module.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
_TO_UNIT = 2.0 ** -53

# stream domains
TAG_SIMULATION = 0
TAG_WEIGHT = 1
TAG_DURATION = 2
TAG_SAMPLE = 3


def mix64(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def derive(key: int, index: int) -> int:
    """Child stream key for ``index`` under ``key``."""
    return mix64(((key ^ (index & MASK64)) + GOLDEN_GAMMA) & MASK64)


def uniform_at(key: int, j: int) -> float:
    """The ``j``-th uniform on [0, 1) of the stream ``key``."""
    return (mix64((key + (j + 1) * GOLDEN_GAMMA) & MASK64) >> 11) * _TO_UNIT


class UniformStream:
    """Callable draw source: each call returns the next uniform of one stream."""

    def __init__(self, key: int):
        self.key = key & MASK64
        self.count = 0

    def __call__(self) -> float:
        u = uniform_at(self.key, self.count)
        self.count += 1
        return u


@dataclass(frozen=True)
class SeedSpec:
    base_seed: int = 0

    def __post_init__(self):
        if not 0 <= self.base_seed <= MASK64:
            raise ValueError(f"base_seed must be a 64-bit unsigned integer, got {self.base_seed}")

    def key(self, *indices: int) -> int:
        k = mix64(self.base_seed)
        for i in indices:
            k = derive(k, i)
        return k

    def stream(self, *indices: int) -> UniformStream:
        return UniformStream(self.key(*indices))


# vectorised twins, used by the numpy kernel

_NP_M1 = np.uint64(_M1)
_NP_M2 = np.uint64(_M2)
_NP_GAMMA = np.uint64(GOLDEN_GAMMA)


def mix64_array(z: np.ndarray) -> np.ndarray:
    z = z.astype(np.uint64, copy=True)
    z ^= z >> np.uint64(30)
    z *= _NP_M1
    z ^= z >> np.uint64(27)
    z *= _NP_M2
    z ^= z >> np.uint64(31)
    return z


def derive_array(keys: np.ndarray, index: np.ndarray) -> np.ndarray:
    return mix64_array((keys ^ index.astype(np.uint64)) + _NP_GAMMA)


def uniform_at_array(keys: np.ndarray, j: int) -> np.ndarray:
    step = np.uint64(((j + 1) * GOLDEN_GAMMA) & MASK64)
    z = mix64_array(keys + step)
    return (z >> np.uint64(11)).astype(np.float64) * _TO_UNIT
