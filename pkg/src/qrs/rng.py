"""Deterministic cross-platform pseudo-random generator.

Every stochastic choice in this package (fixture couplings, optimizer
restarts, benchmark states) flows through splitmix64 so that two runs with
the same seed produce bit-identical artifacts on any machine, independent
of numpy's generator versioning.
"""

from __future__ import annotations

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


class SplitMix64:
    """splitmix64 stream: 64-bit state, one multiply-xorshift scramble per draw.

    Per draw: z += 0x9E3779B97F4A7C15; x = z; x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9; x ^= x >> 27; x *= 0x94D049BB133111EB;
    x ^= x >> 31.  All arithmetic modulo 2**64.
    """

    __slots__ = ("state",)

    def __init__(self, seed: int):
        self.state = seed & _MASK

    def next_u64(self) -> int:
        self.state = (self.state + _GAMMA) & _MASK
        x = self.state
        x ^= x >> 30
        x = (x * 0xBF58476D1CE4E5B9) & _MASK
        x ^= x >> 27
        x = (x * 0x94D049BB133111EB) & _MASK
        x ^= x >> 31
        return x

    def next_double(self) -> float:
        """Uniform double in [0, 1): top 53 bits scaled by 2**-53."""
        return (self.next_u64() >> 11) * 2.0**-53

    def doubles(self, count: int) -> list[float]:
        return [self.next_double() for _ in range(count)]

    def shuffle(self, items: list) -> None:
        """In-place Fisher-Yates shuffle driven by this stream."""
        for i in range(len(items) - 1, 0, -1):
            j = self.next_u64() % (i + 1)
            items[i], items[j] = items[j], items[i]
