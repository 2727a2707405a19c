"""Seeded random streams.

Every stochastic routine takes an explicit :class:`RngStream`; a stream is
fully determined by ``(master_seed, stream_id)`` so trial ``i`` of a run can
be reproduced in isolation.
"""
from __future__ import annotations

import numpy as np

_BUFFER = 4096


class RngStream:
    """Uniform/bit draws from PCG64 keyed by ``(master_seed, stream_id)``."""

    def __init__(self, master_seed: int, stream_id: int = 0, path: tuple[int, ...] = ()):
        if not (0 <= master_seed < 2**64 and 0 <= stream_id < 2**64):
            raise ValueError("master_seed and stream_id must be unsigned 64-bit integers")
        self.master_seed = int(master_seed)
        self.stream_id = int(stream_id)
        self.path = tuple(int(p) for p in path)
        seq = np.random.SeedSequence(entropy=self.master_seed, spawn_key=(self.stream_id, *self.path))
        self._gen = np.random.Generator(np.random.PCG64(seq))
        self._buf = np.empty(0)
        self._pos = 0

    def __repr__(self) -> str:
        return f"RngStream(master_seed={self.master_seed}, stream_id={self.stream_id}, path={self.path})"

    def spawn(self, index: int) -> "RngStream":
        """Child stream for trial ``index``; independent of how many draws the parent made."""
        return RngStream(self.master_seed, self.stream_id, self.path + (index,))

    def uniform(self) -> float:
        """One draw from [0, 1). Buffered, so calls are cheap in hot loops."""
        if self._pos >= len(self._buf):
            self._buf = self._gen.random(_BUFFER)
            self._pos = 0
        u = self._buf[self._pos]
        self._pos += 1
        return float(u)

    def bernoulli(self, p: float) -> bool:
        return self.uniform() < p

    def bit(self) -> int:
        return 1 if self.uniform() < 0.5 else 0

    def angles(self, size: int) -> np.ndarray:
        """``size`` angles uniform in [0, 2*pi)."""
        return np.array([2 * np.pi * self.uniform() for _ in range(size)])

    def integer(self, low: int, high: int) -> int:
        """Integer in [low, high)."""
        return low + int(self.uniform() * (high - low))
