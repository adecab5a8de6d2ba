"""Work distribution across worker threads within one superstep.

Three policies over the active-vertex list:

* static: contiguous blocks of (near-)equal vertex count, fixed up front.
* dynamic: fixed-size chunks claimed first-come-first-served from a shared
  atomic cursor, so fast workers absorb slow chunks.
* edge-balanced: contiguous blocks whose boundaries are found by binary
  search on the prefix sums of active-vertex degrees, so each worker gets
  a near-equal number of *edges* instead of vertices. Boundaries are
  recomputed per superstep because the active list changes.

Dynamic chunking and edge-balancing both fight load imbalance and are
mutually exclusive; :class:`SchedulerMode` encodes exactly one policy.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ConfigError

DEFAULT_CHUNK_SIZE = 256


class SchedulerKind(Enum):
    STATIC = "static"
    DYNAMIC = "dynamic"
    EDGE_BALANCED = "edge-balanced"


@dataclass(frozen=True)
class SchedulerMode:
    kind: SchedulerKind
    chunk_size: int = DEFAULT_CHUNK_SIZE

    def __post_init__(self):
        if self.chunk_size < 1:
            raise ConfigError(f"chunk size must be >= 1, got {self.chunk_size}")

    @classmethod
    def static(cls) -> "SchedulerMode":
        return cls(SchedulerKind.STATIC)

    @classmethod
    def dynamic(cls, chunk_size: int = DEFAULT_CHUNK_SIZE) -> "SchedulerMode":
        return cls(SchedulerKind.DYNAMIC, chunk_size)

    @classmethod
    def edge_balanced(cls) -> "SchedulerMode":
        return cls(SchedulerKind.EDGE_BALANCED)


@dataclass(frozen=True)
class WorkPartition:
    """Contiguous per-worker ranges over an item sequence.

    ``boundaries`` has ``n_workers + 1`` entries; worker ``w`` owns items
    ``[boundaries[w], boundaries[w + 1])``.
    """

    boundaries: np.ndarray

    @property
    def n_workers(self) -> int:
        return len(self.boundaries) - 1

    def block(self, worker: int) -> tuple[int, int]:
        return int(self.boundaries[worker]), int(self.boundaries[worker + 1])

    def block_sizes(self) -> np.ndarray:
        return np.diff(self.boundaries)


def static_partition(n_items: int, n_workers: int) -> WorkPartition:
    """Split ``n_items`` into ``n_workers`` contiguous blocks, sizes within 1."""
    if n_workers < 1:
        raise ConfigError(f"worker count must be >= 1, got {n_workers}")
    base, extra = divmod(n_items, n_workers)
    sizes = np.full(n_workers, base, dtype=np.int64)
    sizes[:extra] += 1
    boundaries = np.zeros(n_workers + 1, dtype=np.int64)
    np.cumsum(sizes, out=boundaries[1:])
    return WorkPartition(boundaries)


def edge_balanced_partition(active_degrees: np.ndarray,
                            n_workers: int) -> WorkPartition:
    """Split the active list so each block covers ~equal summed degree.

    ``active_degrees[i]`` is the degree (in the direction messages flow)
    of the i-th active vertex. Boundary ``k`` is the smallest index whose
    exclusive prefix sum reaches ``k * total / n_workers``; found by binary
    search, compared in exact integer arithmetic. Every block's edge load
    is < ``total / n_workers + max_degree``.
    """
    if n_workers < 1:
        raise ConfigError(f"worker count must be >= 1, got {n_workers}")
    n = int(active_degrees.shape[0])
    boundaries = np.zeros(n_workers + 1, dtype=np.int64)
    boundaries[-1] = n
    if n == 0 or n_workers == 1:
        return WorkPartition(boundaries)
    # exclusive prefix: prefix[i] = edges in items [0, i)
    prefix = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(active_degrees, out=prefix[1:])
    total = int(prefix[-1])
    # prefix[i] >= k*total/W  <=>  prefix[i]*W >= k*total (exact, no floats)
    targets = np.arange(1, n_workers, dtype=np.int64) * total
    cuts = np.searchsorted(prefix * n_workers, targets, side="left")
    boundaries[1:-1] = np.minimum(cuts, n)
    return WorkPartition(boundaries)


class ChunkClaimer:
    """FCFS chunk dispenser shared by all workers for one superstep.

    ``claim`` atomically advances a cursor by ``chunk_size`` and hands the
    caller the range it covered, or ``None`` once the items are exhausted.
    Every item is claimed exactly once across all callers.
    """

    def __init__(self, n_items: int, chunk_size: int = DEFAULT_CHUNK_SIZE):
        if chunk_size < 1:
            raise ConfigError(f"chunk size must be >= 1, got {chunk_size}")
        self.n_items = n_items
        self.chunk_size = chunk_size
        self._cursor = 0
        self._lock = threading.Lock()

    def claim(self) -> tuple[int, int] | None:
        with self._lock:
            start = self._cursor
            if start >= self.n_items:
                return None
            self._cursor = start + self.chunk_size
        return start, min(start + self.chunk_size, self.n_items)


def dynamic_chunks(n_items: int,
                   chunk_size: int = DEFAULT_CHUNK_SIZE) -> ChunkClaimer:
    return ChunkClaimer(n_items, chunk_size)
