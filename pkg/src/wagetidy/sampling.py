"""Seeded, platform-independent sampling of person ids.

Reproducible figures need the same sample on every machine and library
version, so this module pins the full algorithm rather than delegating
to a stdlib or numpy generator: a splitmix64 stream drives a partial
Fisher-Yates shuffle over the id-sorted population, and the first n
positions form the sample.  Bounded draws use rejection sampling, so
every permutation prefix is equally likely.
"""

from __future__ import annotations

from typing import Sequence

__all__ = ["SplitMix64", "sample_ids"]

_MASK64 = (1 << 64) - 1


class SplitMix64:
    """The splitmix64 pseudo-random stream (public-domain constants)."""

    def __init__(self, seed: int) -> None:
        self._state = seed & _MASK64

    def next_uint64(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & _MASK64
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
        return z ^ (z >> 31)

    def below(self, bound: int) -> int:
        """Uniform integer in [0, bound) by rejection."""
        if bound <= 0:
            raise ValueError("bound must be positive")
        limit = _MASK64 - (_MASK64 + 1) % bound
        while True:
            draw = self.next_uint64()
            if draw <= limit:
                return draw % bound


def sample_ids(population: Sequence[int], n: int, seed: int) -> list[int]:
    """Uniform sample of n ids without replacement, deterministic in
    (sorted population, n, seed)."""
    ids = sorted(population)
    if n > len(ids):
        raise ValueError(f"sample size {n} exceeds population {len(ids)}")
    if n < 0:
        raise ValueError("sample size must be non-negative")
    rng = SplitMix64(seed)
    for i in range(n):
        j = i + rng.below(len(ids) - i)
        ids[i], ids[j] = ids[j], ids[i]
    return ids[:n]
