"""Counter-based noise array E_inf built on the SplitMix64 finalizer."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

GOLDEN_GAMMA = np.uint64(0x9E3779B97F4A7C15)
MIX1 = np.uint64(0xBF58476D1CE4E5B9)
MIX2 = np.uint64(0x94D049BB133111EB)
MASK64 = (1 << 64) - 1

DISTS = ("complex-gaussian", "real-gaussian", "complex-uniform-disk-normalized",
         "rademacher", "zero")
ALIASES = {"uniform": "complex-uniform-disk-normalized", "gaussian": "complex-gaussian"}


def mix64(x):
    """SplitMix64 finalizer on uint64 arrays (wrapping arithmetic)."""
    x = np.asarray(x, dtype=np.uint64)
    with np.errstate(over="ignore"):
        x = x + GOLDEN_GAMMA
        x = (x ^ (x >> np.uint64(30))) * MIX1
        x = (x ^ (x >> np.uint64(27))) * MIX2
    return x ^ (x >> np.uint64(31))


def mix64_int(x: int) -> int:
    return int(mix64(np.uint64(x & MASK64)))


def derive_seed(seed: int, t: int) -> int:
    """Seed of trial t: seed xor m(t)."""
    return (int(seed) & MASK64) ^ mix64_int(t)


def _counter(i, j, t):
    # i in the high 32 bits, j and t below; injective for i < 2^32, j < 2^31
    i = np.asarray(i, dtype=np.uint64)
    j = np.asarray(j, dtype=np.uint64)
    return (i << np.uint64(32)) + (j << np.uint64(1)) + np.uint64(t)


def _uniform(words):
    # top 53 bits so the float is exactly representable and strictly below 1
    return (words >> np.uint64(11)).astype(np.float64) * 2.0 ** -53


@dataclass(frozen=True)
class NoiseSource:
    seed: int
    dist: str = "complex-gaussian"

    def __post_init__(self):
        dist = ALIASES.get(self.dist, self.dist)
        if dist not in DISTS:
            raise DomainError(f"unknown noise distribution {self.dist!r}")
        object.__setattr__(self, "dist", dist)
        object.__setattr__(self, "seed", int(self.seed) & MASK64)

    def entries(self, i, j) -> np.ndarray:
        """Entries e_{i,j} for broadcastable 1-based index arrays."""
        i, j = np.broadcast_arrays(np.asarray(i, dtype=np.int64), np.asarray(j, dtype=np.int64))
        if i.size and (i.min() < 1 or j.min() < 1):
            raise DomainError("noise indices are 1-based")
        if self.dist == "zero":
            return np.zeros(i.shape, dtype=complex)
        s = np.uint64(self.seed)
        w0 = mix64(s ^ mix64(_counter(i, j, 0)))
        w1 = mix64(s ^ mix64(_counter(i, j, 1)))
        if self.dist == "rademacher":
            return np.where((w0 >> np.uint64(63)) == 0, 1.0, -1.0).astype(complex)
        u0 = _uniform(w0)
        u1 = _uniform(w1)
        if self.dist == "complex-uniform-disk-normalized":
            return np.sqrt(1.5) * ((2 * u0 - 1) + 1j * (2 * u1 - 1))
        u0 = np.where(u0 == 0.0, 2.0 ** -64, u0)
        r = np.sqrt(-2.0 * np.log(u0))
        g0 = r * np.cos(2 * np.pi * u1)
        if self.dist == "real-gaussian":
            return g0.astype(complex)
        g1 = r * np.sin(2 * np.pi * u1)
        return (g0 + 1j * g1) / np.sqrt(2.0)

    def entry(self, i: int, j: int) -> complex:
        return complex(self.entries(i, j))

    def block(self, rows, cols) -> np.ndarray:
        """Submatrix E_inf[rows; cols] for 1-based index lists."""
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        return self.entries(rows[:, None], cols[None, :])

    def trial(self, t: int) -> "NoiseSource":
        return NoiseSource(derive_seed(self.seed, t), self.dist)


def entry(src: NoiseSource, i: int, j: int) -> complex:
    return src.entry(i, j)


def sample_block(src: NoiseSource, N: int) -> np.ndarray:
    if N < 1:
        raise DomainError("N must be >= 1")
    idx = np.arange(1, N + 1)
    return src.block(idx, idx)


class FixedNoise:
    """Noise array with finitely many nonzero entries {(i, j): value}, 1-based.

    Exposes the NoiseSource read interface; used to isolate single monomials.
    """

    dist = "fixed"

    def __init__(self, values: dict):
        self.values = {(int(i), int(j)): complex(v) for (i, j), v in values.items()}

    def entries(self, i, j) -> np.ndarray:
        i, j = np.broadcast_arrays(np.asarray(i, dtype=np.int64), np.asarray(j, dtype=np.int64))
        out = np.zeros(i.shape, dtype=complex)
        for (a, b), v in self.values.items():
            out[(i == a) & (j == b)] = v
        return out

    def entry(self, i: int, j: int) -> complex:
        return self.values.get((int(i), int(j)), 0j)

    def block(self, rows, cols) -> np.ndarray:
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        return self.entries(rows[:, None], cols[None, :])
