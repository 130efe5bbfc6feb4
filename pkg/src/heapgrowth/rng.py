"""Reproducible, splittable random streams.

Every stochastic routine takes an :class:`RngStream` rather than a bare
seed.  A stream is addressed by ``(master_seed, stream_index)``; the pair is
fed to :class:`numpy.random.SeedSequence` so that distinct indices give
statistically independent Philox generators.
"""

from __future__ import annotations

import numpy as np


class RngStream:
    def __init__(self, master_seed: int, stream_index: int = 0, _path: tuple = ()):
        if stream_index < 0:
            raise ValueError("stream_index must be non-negative")
        self.master_seed = int(master_seed) & 0xFFFFFFFFFFFFFFFF
        self.stream_index = int(stream_index)
        self._path = tuple(int(p) for p in _path)
        seq = np.random.SeedSequence(
            self.master_seed, spawn_key=(self.stream_index,) + self._path
        )
        self.generator = np.random.Generator(np.random.Philox(seq))

    def child(self, index: int) -> "RngStream":
        """Independent sub-stream, e.g. one per ensemble member."""
        if index < 0:
            raise ValueError("child index must be non-negative")
        return RngStream(self.master_seed, self.stream_index, self._path + (index,))

    def columns(self, n_columns: int, size: int) -> np.ndarray:
        """Uniform 0-based column indices."""
        return self.generator.integers(0, n_columns, size=size, dtype=np.int64)

    def __repr__(self):
        path = "".join(f"/{p}" for p in self._path)
        return f"RngStream({self.master_seed}, {self.stream_index}{path})"
