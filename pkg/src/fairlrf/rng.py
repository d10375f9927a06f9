"""Portable seeded random stream.

The generator is xoshiro256** (Blackman & Vigna) whose 256-bit state is
filled by four successive SplitMix64 outputs of the user seed. Derived
draws:

* ``random()``: top 53 bits of a u64 divided by 2**53, in [0, 1).
* ``randbelow(n)``: rejection sampling on the full 64-bit output
  (values >= the largest multiple of n are redrawn), then ``% n``.
* ``normal()``: Box-Muller on two ``random()`` draws u1, u2 using
  ``sqrt(-2 ln(1 - u1)) * cos(2 pi u2)`` and the matching ``sin`` term,
  which is returned by the next call.
* ``permutation(n)``: Fisher-Yates from the last index down.

Everything is pure integer arithmetic plus libm calls, so streams are
identical across platforms and languages.
"""

from __future__ import annotations

import math

import numpy as np

MASK64 = 0xFFFFFFFFFFFFFFFF


def splitmix64(state: int) -> tuple[int, int]:
    """Advance a SplitMix64 state; returns ``(new_state, output)``."""
    state = (state + 0x9E3779B97F4A7C15) & MASK64
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return state, z ^ (z >> 31)


def _rotl(x: int, k: int) -> int:
    return ((x << k) | (x >> (64 - k))) & MASK64


class Rng:
    def __init__(self, seed: int):
        sm = int(seed) & MASK64
        s = []
        for _ in range(4):
            sm, out = splitmix64(sm)
            s.append(out)
        self._s = s
        self._spare: float | None = None

    def next_u64(self) -> int:
        s0, s1, s2, s3 = self._s
        result = (_rotl((s1 * 5) & MASK64, 7) * 9) & MASK64
        t = (s1 << 17) & MASK64
        s2 ^= s0
        s3 ^= s1
        s1 ^= s2
        s0 ^= s3
        s2 ^= t
        s3 = _rotl(s3, 45)
        self._s = [s0, s1, s2, s3]
        return result

    def random(self) -> float:
        return (self.next_u64() >> 11) * (1.0 / 9007199254740992.0)

    def uniform(self, low: float, high: float) -> float:
        return low + (high - low) * self.random()

    def randbelow(self, n: int) -> int:
        if n <= 0:
            raise ValueError("randbelow needs n >= 1")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            r = self.next_u64()
            if r < limit:
                return r % n

    def normal(self) -> float:
        if self._spare is not None:
            z, self._spare = self._spare, None
            return z
        u1 = self.random()
        u2 = self.random()
        radius = math.sqrt(-2.0 * math.log(1.0 - u1))
        angle = 2.0 * math.pi * u2
        self._spare = radius * math.sin(angle)
        return radius * math.cos(angle)

    def permutation(self, n: int) -> np.ndarray:
        idx = list(range(n))
        for i in range(n - 1, 0, -1):
            j = self.randbelow(i + 1)
            idx[i], idx[j] = idx[j], idx[i]
        return np.asarray(idx, dtype=np.int64)

    def uniform_array(self, low: float, high: float, shape) -> np.ndarray:
        size = int(np.prod(shape))
        out = np.fromiter((self.uniform(low, high) for _ in range(size)), dtype=np.float64, count=size)
        return out.reshape(shape)

    def normal_array(self, shape) -> np.ndarray:
        size = int(np.prod(shape))
        out = np.fromiter((self.normal() for _ in range(size)), dtype=np.float64, count=size)
        return out.reshape(shape)
