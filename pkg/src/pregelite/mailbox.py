"""Per-vertex message slots and the three push combiner strategies.

Each vertex owns one message slot per buffer parity: a presence flag plus a
single value, because messages are folded with a commutative, associative
combine function the moment they arrive. Double buffering keeps the slots
read during superstep ``s`` separate from the slots written for ``s + 1``;
``swap_buffers`` flips the roles at the barrier.

Three interchangeable strategies protect concurrent sends to one slot:

* ``LOCK``: take the slot's lock for every send.
* ``CAS``: lock-free value updates, but the slot values must be pre-filled
  with the combine function's neutral element every superstep (that refill
  is the strategy's cost, and why it needs an algorithm-declared neutral).
* ``HYBRID``: only the send that first publishes a value into an empty slot
  takes the lock (store value, then set the flag); every later send folds
  in lock-free with a compare-and-swap retry loop.

Python lane note: the one-byte spinlock and hardware CAS of the C design
map onto ``threading.Lock``. ``MessageBuffer.cas`` emulates a single-word
compare-and-swap at instruction granularity by holding the slot's lock
around the compare+store; callers still treat it as a failable atomic and
retry, so the protocol structure is unchanged.
"""

from __future__ import annotations

import operator
from dataclasses import dataclass
from enum import Enum
from typing import Any, Callable

import numpy as np

from .errors import ConfigError, PhaseError
from .layout import VertexStore


# ======================================================================
# Combine functions
# ======================================================================

@dataclass(frozen=True)
class CombineFn:
    """A commutative, associative fold over message values.

    ``fn`` combines two scalars. ``ufunc`` is the vectorised equivalent
    (enables the array fold on the pull path); ``neutral`` is the identity
    element, required only by the ``CAS`` strategy's slot pre-fill.
    """

    fn: Callable[[Any, Any], Any]
    ufunc: np.ufunc | None = None
    neutral: Any = None
    name: str = "custom"


def min_combine(dtype) -> CombineFn:
    dt = np.dtype(dtype)
    if np.issubdtype(dt, np.integer):
        neutral = int(np.iinfo(dt).max)
    else:
        neutral = np.inf
    return CombineFn(fn=min, ufunc=np.minimum, neutral=neutral, name="min")


def sum_combine(dtype) -> CombineFn:
    dt = np.dtype(dtype)
    neutral = 0 if np.issubdtype(dt, np.integer) else 0.0
    return CombineFn(fn=operator.add, ufunc=np.add, neutral=neutral, name="sum")


class CombinerKind(Enum):
    LOCK = "lock"
    CAS = "cas"
    HYBRID = "hybrid"


# ======================================================================
# One parity's worth of slots
# ======================================================================

class MessageBuffer:
    """Flag/value views for one buffer parity, plus the slot locks.

    ``accepting`` is flipped by the engine around the compute phase; when
    ``guarded`` is on, senders raise :class:`PhaseError` outside it.
    """

    __slots__ = ("flags", "values", "_store", "parity", "accepting", "guarded")

    def __init__(self, store: VertexStore, parity: int, guarded: bool = False):
        self.flags = store.flags(parity)
        self.values = store.values(parity)
        self._store = store
        self.parity = parity
        self.accepting = False
        self.guarded = guarded

    @property
    def locks(self):
        return self._store.locks

    def cas(self, v: int, expected, new) -> bool:
        """Single-word compare-and-swap on slot ``v``'s value."""
        with self._store.locks[v]:
            if self.values[v] == expected:
                self.values[v] = new
                return True
            return False

    def read_and_consume(self, v: int):
        """Pop slot ``v``: value if the flag was set (flag cleared), else None."""
        if self.flags[v]:
            self.flags[v] = False
            return self.values[v]
        return None

    def reset(self, fill_value=None) -> None:
        """Clear every presence flag; optionally pre-fill all values."""
        self.flags.fill(False)
        if fill_value is not None:
            self.values.fill(fill_value)


def _check_phase(buf: MessageBuffer) -> None:
    if buf.guarded and not buf.accepting:
        raise PhaseError(
            f"send into buffer parity {buf.parity} outside the compute phase")


# ======================================================================
# Send strategies
# ======================================================================

def send_lock(buf: MessageBuffer, dst: int, msg, combine: CombineFn) -> None:
    """Baseline: every send takes the destination slot's lock."""
    _check_phase(buf)
    with buf.locks[dst]:
        if buf.flags[dst]:
            buf.values[dst] = combine.fn(buf.values[dst], msg)
        else:
            buf.values[dst] = msg
            buf.flags[dst] = True


def apply_cas(buf: MessageBuffer, dst: int, msg, combine: CombineFn) -> int:
    """Fold ``msg`` into an already-published slot with a CAS retry loop.

    Pre: slot ``dst`` holds a value (its publisher ran first). Returns the
    number of CAS attempts; when combining changes nothing (e.g. a larger
    distance arriving at a min slot) the loop body never runs and no
    atomic write is attempted at all.
    """
    fn = combine.fn
    old = buf.values[dst]
    new = fn(old, msg)
    attempts = 0
    while new != old:
        attempts += 1
        if buf.cas(dst, old, new):
            break
        old = buf.values[dst]
        new = fn(old, msg)
    return attempts


def send_cas(buf: MessageBuffer, dst: int, msg, combine: CombineFn) -> None:
    """Pure-CAS strategy: requires neutral-prefilled slot values.

    The pre-fill (done by the engine at every buffer swap) acts as the
    publication, so the flag store here is an unconditional idempotent
    write and the value update is always the lock-free fold.
    """
    _check_phase(buf)
    buf.flags[dst] = True
    apply_cas(buf, dst, msg, combine)


def send_hybrid(buf: MessageBuffer, dst: int, msg, combine: CombineFn) -> None:
    """Lock only to publish into an empty slot; combine lock-free after.

    The publisher stores the message value *before* setting the flag, so
    any sender that observes the flag can safely fold against the value.
    """
    _check_phase(buf)
    if buf.flags[dst]:
        apply_cas(buf, dst, msg, combine)
        return
    lock = buf.locks[dst]
    lock.acquire()
    if buf.flags[dst]:
        # lost the publication race; fold in lock-free like everyone else
        lock.release()
        apply_cas(buf, dst, msg, combine)
    else:
        buf.values[dst] = msg
        buf.flags[dst] = True
        lock.release()


_SENDERS: dict[CombinerKind, Callable] = {
    CombinerKind.LOCK: send_lock,
    CombinerKind.CAS: send_cas,
    CombinerKind.HYBRID: send_hybrid,
}


def sender_for(kind: CombinerKind) -> Callable:
    return _SENDERS[kind]


# ======================================================================
# Double-buffered mailbox
# ======================================================================

class Mailbox:
    """The two message buffers of a run plus the active combiner strategy.

    ``current`` is read during the compute phase; ``next`` receives sends.
    """

    def __init__(self, store: VertexStore, combine: CombineFn | None,
                 kind: CombinerKind = CombinerKind.HYBRID,
                 guarded: bool = False):
        if kind is CombinerKind.CAS and (combine is None or combine.neutral is None):
            raise ConfigError(
                "the CAS combiner strategy needs a combine function with a "
                "neutral element to pre-fill slots with")
        self.store = store
        self.combine = combine
        self.kind = kind
        self.parity = 0
        self._buffers = (MessageBuffer(store, 0, guarded),
                         MessageBuffer(store, 1, guarded))

    @property
    def current(self) -> MessageBuffer:
        return self._buffers[self.parity]

    @property
    def next(self) -> MessageBuffer:
        return self._buffers[1 - self.parity]

    def prepare(self) -> None:
        """One-time setup before superstep 0 (CAS slot pre-fill)."""
        if self.kind is CombinerKind.CAS:
            self.next.values.fill(self.combine.neutral)

    def swap_buffers(self) -> None:
        """Barrier step: retire the consumed buffer and flip parities.

        The retired buffer's flags are cleared so it can take the following
        superstep's sends; under the CAS strategy its values are also
        re-filled with the neutral element (the strategy's standing cost).
        """
        retired = self.current
        retired.reset(self.combine.neutral
                      if self.kind is CombinerKind.CAS else None)
        self.parity ^= 1

    def sender(self) -> Callable[[int, Any], None]:
        """Bind the strategy to the current epoch's write-side buffer."""
        fn = _SENDERS[self.kind]
        buf = self.next
        combine = self.combine
        if combine is None:
            raise ConfigError("push-mode sends need a combine function")

        def send(dst: int, msg) -> None:
            fn(buf, dst, msg, combine)

        return send
