"""Seeded, splittable randomness.

Streams are counter-based (Philox) and keyed by ``(master_seed, stream_id)``,
so any consumer can derive an independent stream for, say, trial ``t`` without
coordinating with other consumers.  Two sources built from the same pair
produce identical bit streams.
"""

from __future__ import annotations

import numpy as np

__all__ = ["RandomSource"]


class RandomSource:
    """A reproducible random stream keyed by (master seed, stream id)."""

    def __init__(self, master_seed: int, stream_id: int = 0):
        self.master_seed = int(master_seed)
        self.stream_id = int(stream_id)
        bitgen = np.random.Philox(
            key=np.array(
                [self.master_seed & (2**64 - 1), self.stream_id & (2**64 - 1)],
                dtype=np.uint64,
            )
        )
        self.generator = np.random.Generator(bitgen)

    def split(self, stream_id: int) -> "RandomSource":
        """Derive an independent stream under the same master seed.

        The child's id mixes the parent's id so nested splits stay distinct.
        """
        child = (self.stream_id * 0x9E3779B97F4A7C15 + stream_id + 1) & (2**64 - 1)
        return RandomSource(self.master_seed, child)

    # Convenience pass-throughs used throughout the library.
    def uniform(self, size=None) -> np.ndarray:
        return self.generator.random(size)

    def coin(self, p: float) -> bool:
        return bool(self.generator.random() < p)

    def permutation(self, n: int) -> np.ndarray:
        return self.generator.permutation(n)

    def integers(self, low, high=None, size=None):
        return self.generator.integers(low, high, size=size)

    def __repr__(self):
        return f"RandomSource(master_seed={self.master_seed}, stream_id={self.stream_id})"
