"""Reproducible random number streams.

Two layers:

* :class:`StreamKey` wraps numpy's counter-based Philox generator, keyed by
  ``(seed, stream)`` through ``SeedSequence(entropy=seed, spawn_key=(stream, ...))``.
  Distinct ``(seed, stream)`` pairs map to distinct, statistically independent
  generator states, and replica ``k`` of an experiment uses stream ``k``, so
  results do not depend on scheduling order or worker count.

* A stateless hashed-counter generator (`uniform_at`, `normal_at`,
  `exponential_at`) that produces the draw for an arbitrary ``(label, counter)``
  cell of a keyed table.  The branching engine assigns one label per particle,
  which makes a pruned run consume *exactly* the same random numbers as an
  unpruned run for every surviving particle (pruning only changes which cells
  are read).  The hash is two rounds of the SplitMix64 finalizer; normals are
  obtained by exact inverse-CDF transform of the 64-bit uniform.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

_U64 = np.uint64
_GOLDEN = _U64(0x9E3779B97F4A7C15)
_MIX1 = _U64(0xBF58476D1CE4E5B9)
_MIX2 = _U64(0x94D049BB133111EB)
_INV_2_64 = 2.0 ** -64

MAX_SEED = 2**64 - 1


@dataclass(frozen=True)
class StreamKey:
    """Identifies one reproducible random stream as (seed, stream index).

    ``path`` extends the identity for nested sub-draws (e.g. draw ``i`` inside
    replica ``k``); replica keys always live at the top level.
    """

    seed: int
    stream: int = 0
    path: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        if not (0 <= self.seed <= MAX_SEED):
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if self.stream < 0:
            raise ValueError(f"stream index must be >= 0, got {self.stream}")

    def generator(self, *extra: int) -> np.random.Generator:
        """Philox generator for this key; extra indices derive sub-streams.

        The (seed, stream, *path) -> state map is injective because it is the
        documented SeedSequence spawn-key mechanism; distinct keys give
        statistically independent streams.
        """
        ss = np.random.SeedSequence(
            entropy=self.seed, spawn_key=(self.stream, *self.path, *extra)
        )
        return np.random.Generator(np.random.Philox(ss))

    def table_key(self, *extra: int) -> np.uint64:
        """64-bit base key for the hashed (label, counter) table."""
        ss = np.random.SeedSequence(
            entropy=self.seed, spawn_key=(self.stream, *self.path, *extra)
        )
        return _U64(ss.generate_state(1, np.uint64)[0])

    def replica(self, index: int) -> "StreamKey":
        """Top-level key for replica ``index`` under the same seed."""
        return StreamKey(self.seed, index)

    def child(self, *indices: int) -> "StreamKey":
        """Sub-key for nested independent draws within this stream."""
        return StreamKey(self.seed, self.stream, self.path + indices)


def _splitmix(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> _U64(30))) * _MIX1
    z = (z ^ (z >> _U64(27))) * _MIX2
    return z ^ (z >> _U64(31))


def uniform_at(base: np.uint64, label: np.ndarray, counter: np.ndarray) -> np.ndarray:
    """Uniform(0,1) draw for table cells (label, counter) under key ``base``.

    Open interval: the raw 64-bit word w maps to (w + 0.5) * 2**-64.
    """
    z = _splitmix((np.asarray(label, dtype=np.uint64) + _GOLDEN) * _GOLDEN + base)
    z = _splitmix(z + np.asarray(counter, dtype=np.uint64) * _GOLDEN)
    return (z.astype(np.float64) + 0.5) * _INV_2_64


def normal_at(base: np.uint64, label: np.ndarray, counter: np.ndarray) -> np.ndarray:
    """Standard normal via inverse CDF of the cell uniform."""
    return ndtri(uniform_at(base, label, counter))


def exponential_at(base: np.uint64, label: np.ndarray, counter: np.ndarray) -> np.ndarray:
    """Unit-rate exponential via inverse CDF of the cell uniform."""
    return -np.log(uniform_at(base, label, counter))
