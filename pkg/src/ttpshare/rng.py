"""Deterministic random sources.

Every randomized operation in the package takes an explicit random source so
runs can be replayed bit-for-bit from a seed. ``SplitMix64`` is the reference
generator; ``ScriptedSource`` replays fixed values and is how tests force
particular draws (for instance ``r1 = 13`` in the worked partition example).
"""

from __future__ import annotations

from typing import Iterable, Protocol

MASK64 = (1 << 64) - 1
GOLDEN_GAMMA = 0x9E3779B97F4A7C15


class RandomSource(Protocol):
    def next_u64(self) -> int: ...

    def randint(self, lo: int, hi: int) -> int: ...


class SplitMix64:
    """SplitMix64 generator with rejection sampling for integer ranges."""

    def __init__(self, seed: int):
        self.state = seed & MASK64
        self.draws = 0

    def next_u64(self) -> int:
        self.state = (self.state + GOLDEN_GAMMA) & MASK64
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
        self.draws += 1
        return z ^ (z >> 31)

    def randint(self, lo: int, hi: int) -> int:
        """Uniform integer in the closed range [lo, hi].

        Draws ceil(bits/64) words, concatenates them big-endian, keeps the low
        ``bits`` bits and rejects values outside the span. A singleton range
        consumes nothing.
        """
        if hi < lo:
            raise ValueError(f"empty range [{lo}, {hi}]")
        span = hi - lo + 1
        if span == 1:
            return lo
        bits = (span - 1).bit_length()
        words = (bits + 63) // 64
        mask = (1 << bits) - 1
        while True:
            v = 0
            for _ in range(words):
                v = (v << 64) | self.next_u64()
            v &= mask
            if v < span:
                return lo + v


class ScriptedSource:
    """Replays a fixed list of values; raises once the script runs out."""

    def __init__(self, values: Iterable[int]):
        self._values = list(values)
        self._pos = 0

    def _pop(self) -> int:
        if self._pos >= len(self._values):
            raise RuntimeError("scripted random source exhausted")
        v = self._values[self._pos]
        self._pos += 1
        return v

    def next_u64(self) -> int:
        return self._pop() & MASK64

    def randint(self, lo: int, hi: int) -> int:
        v = self._pop()
        if not lo <= v <= hi:
            raise ValueError(f"scripted value {v} outside [{lo}, {hi}]")
        return v

    @property
    def remaining(self) -> int:
        return len(self._values) - self._pos
