"""Vertex attribute storage: interleaved vs externalised layouts.

Every vertex owns four attributes: two message slots (the "hot" pair, one
per buffer parity, each a ``(flag, value)`` record) and the "cold" pair
``(state, halted)`` that only the vertex itself touches.

The two layouts hold identical data and expose identical views; they differ
only in memory placement:

* ``INTERLEAVED``: one packed record per vertex holding hot0, hot1 and the
  cold fields side by side. Reading a neighbour's message slot drags that
  neighbour's unrelated cold bytes through the cache with it.
* ``EXTERNALISED``: three separate packed arrays (hot0, hot1, cold), so the
  buffers scanned during message exchange stay dense and the cold fields
  never share a cache line with them.

Per-vertex locks (used by the push-mode combiners) live outside both
layouts and are only materialised on demand.
"""

from __future__ import annotations

import threading
from enum import Enum

import numpy as np

from .errors import ConfigError


class LayoutMode(Enum):
    INTERLEAVED = "interleaved"
    EXTERNALISED = "externalised"


def hot_dtype(message_dtype: np.dtype | type) -> np.dtype:
    """Packed per-slot record: presence flag + message value."""
    return np.dtype([("flag", "?"), ("msg", np.dtype(message_dtype))],
                    align=False)


def cold_dtype(state_dtype: np.dtype | type) -> np.dtype:
    return np.dtype([("state", np.dtype(state_dtype)), ("halted", "?")],
                    align=False)


class VertexStore:
    """Owns every per-vertex attribute for one run.

    The engine and mailbox work exclusively through the view attributes
    (``flags(p)``, ``values(p)``, ``state``, ``halted``), which are layout
    agnostic; only allocation differs between modes.
    """

    def __init__(self, n: int, message_dtype, state_dtype,
                 mode: LayoutMode = LayoutMode.INTERLEAVED):
        if n < 0:
            raise ConfigError(f"vertex count must be >= 0, got {n}")
        hot_dt = hot_dtype(message_dtype)
        cold_dt = cold_dtype(state_dtype)
        self.n = n
        self.mode = mode
        self.message_dtype = hot_dt["msg"]
        self.state_dtype = cold_dt["state"]

        if mode is LayoutMode.INTERLEAVED:
            record = np.dtype([("hot0", hot_dt), ("hot1", hot_dt),
                               ("cold", cold_dt)], align=False)
            self._rows = np.zeros(n, dtype=record)
            self._hot = (self._rows["hot0"], self._rows["hot1"])
            self._cold = self._rows["cold"]
        elif mode is LayoutMode.EXTERNALISED:
            self._rows = None
            self._hot = (np.zeros(n, dtype=hot_dt), np.zeros(n, dtype=hot_dt))
            self._cold = np.zeros(n, dtype=cold_dt)
        else:
            raise ConfigError(f"unknown layout mode: {mode!r}")

        self._flags = (self._hot[0]["flag"], self._hot[1]["flag"])
        self._values = (self._hot[0]["msg"], self._hot[1]["msg"])
        self.state = self._cold["state"]
        self.halted = self._cold["halted"]
        self._locks: list[threading.Lock] | None = None

    # ---- hot pair -----------------------------------------------------

    def hot(self, parity: int) -> np.ndarray:
        return self._hot[parity]

    def flags(self, parity: int) -> np.ndarray:
        return self._flags[parity]

    def values(self, parity: int) -> np.ndarray:
        return self._values[parity]

    # ---- cold pair ----------------------------------------------------

    def cold(self, v: int) -> np.void:
        """Record view of one vertex's cold fields; writes go through."""
        return self._cold[v]

    # ---- locks --------------------------------------------------------

    @property
    def locks(self) -> list[threading.Lock]:
        if self._locks is None:
            self._locks = [threading.Lock() for _ in range(self.n)]
        return self._locks

    # ---- introspection -------------------------------------------------

    @property
    def hot_itemsize(self) -> int:
        return self._hot[0].dtype.itemsize

    @property
    def record_nbytes(self) -> int:
        """Bytes per vertex across all attribute storage."""
        if self._rows is not None:
            return self._rows.dtype.itemsize
        return 2 * self._hot[0].dtype.itemsize + self._cold.dtype.itemsize

    def buffers_contiguous(self) -> bool:
        """True when the hot buffers are dense arrays of their own."""
        return self._hot[0].flags.c_contiguous

    def __repr__(self) -> str:
        return (f"VertexStore(n={self.n}, mode={self.mode.value}, "
                f"msg={self.message_dtype}, state={self.state_dtype})")
