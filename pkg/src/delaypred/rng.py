"""SplitMix64: a small, named, portable random generator.

Dataset sampling must be bit-reproducible from the seed alone, across
languages and library versions, so we avoid numpy's generators here.
SplitMix64 (Steele/Lea/Flood 2014, as published in Vigna's reference C
code) keeps 64 bits of state; uniforms take the top 53 bits of each
output word, u = (x >> 11) * 2^-53.
"""

from __future__ import annotations

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15
_MUL1 = 0xBF58476D1CE4E5B9
_MUL2 = 0x94D049BB133111EB


class SplitMix64:
    __slots__ = ("_state",)

    def __init__(self, seed: int):
        self._state = seed & _MASK

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK
        z = self._state
        z = ((z ^ (z >> 30)) * _MUL1) & _MASK
        z = ((z ^ (z >> 27)) * _MUL2) & _MASK
        return z ^ (z >> 31)

    def uniform(self, lo: float = 0.0, hi: float = 1.0) -> float:
        u = (self.next_u64() >> 11) * 2.0 ** -53
        return lo + (hi - lo) * u

    def shuffle(self, items: list) -> None:
        # Fisher-Yates, index by modulo; the bias at 64 bits is far below
        # anything observable and the convention is trivial to mirror.
        for i in range(len(items) - 1, 0, -1):
            j = self.next_u64() % (i + 1)
            items[i], items[j] = items[j], items[i]
