"""Deterministic seeding and random draws.

Every stochastic operation in the toolkit derives one 64-bit seed from its
cell key (FNV-1a) and draws from a counter-based splitmix64 stream, so
results are independent of scheduling and worker count.
"""

from __future__ import annotations

import numpy as np

_MASK64 = (1 << 64) - 1
_FNV_OFFSET = 0xCBF29CE484222325
_FNV_PRIME = 0x00000100000001B3

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)


def fnv1a64(*parts: object) -> int:
    """Hash the string forms of `parts`, NUL-separated, with 64-bit FNV-1a."""
    h = _FNV_OFFSET
    for i, part in enumerate(parts):
        data = str(part).encode("utf-8")
        if i:
            data = b"\x00" + data
        for byte in data:
            h = ((h ^ byte) * _FNV_PRIME) & _MASK64
    return h


def _mix(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _MIX1
    z = (z ^ (z >> np.uint64(27))) * _MIX2
    return z ^ (z >> np.uint64(31))


class SplitMix64:
    """Counter-based splitmix64 stream.

    Draws are produced in vectorized blocks; the counter advances by the
    block size, so a given seed always yields the same sequence regardless
    of how draws are batched across calls of equal sizes.
    """

    def __init__(self, seed: int):
        self._seed = np.uint64(seed & _MASK64)
        self._pos = 0

    def u64(self, n: int) -> np.ndarray:
        """Next `n` raw 64-bit values."""
        idx = np.arange(self._pos + 1, self._pos + n + 1, dtype=np.uint64)
        self._pos += n
        with np.errstate(over="ignore"):
            return _mix(self._seed + idx * _GAMMA)

    def uniforms(self, n: int, low: float = 0.0, high: float = 1.0) -> np.ndarray:
        """`n` float64 values uniform in [low, high)."""
        u = (self.u64(n) >> np.uint64(11)).astype(np.float64) * 2.0**-53
        return low + u * (high - low)

    def integers(self, n: int, low: int, high: int) -> np.ndarray:
        """`n` int64 values uniform in [low, high)."""
        u = self.uniforms(n)
        return (low + np.floor(u * (high - low))).astype(np.int64)

    def normals(self, n: int, sigma: float = 1.0) -> np.ndarray:
        """`n` float64 draws from N(0, sigma^2) via Box-Muller."""
        pairs = (n + 1) // 2
        u1 = self.uniforms(pairs)
        u2 = self.uniforms(pairs)
        r = np.sqrt(-2.0 * np.log1p(-u1))
        theta = 2.0 * np.pi * u2
        out = np.empty(2 * pairs, dtype=np.float64)
        out[0::2] = r * np.cos(theta)
        out[1::2] = r * np.sin(theta)
        return sigma * out[:n]

    def split(self) -> "SplitMix64":
        """Fork an independent child stream."""
        return SplitMix64(int(self.u64(1)[0]))
