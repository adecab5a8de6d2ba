"""Barrier-synchronised superstep executor.

A run proceeds in supersteps. In each one, every active vertex's compute
function is called exactly once with the combined message addressed to it;
computes mutate their own vertex's state, emit messages for the *next*
superstep, and may vote to halt. Workers meet at a barrier, the engine
derives the next active frontier, swaps the message buffers, and repeats
until no vertex is active and no message is pending (or the superstep cap
is hit).

Communication modes:

* ``PUSH``: computes address messages to chosen vertices; concurrent sends
  to one slot are folded on arrival by the configured combiner strategy.
* ``PULL``: a compute publishes at most one broadcast value into its own
  slot, and each vertex folds the broadcasts of its in-neighbours at the
  start of its next compute. No write contention exists by construction,
  so this mode ignores the combiner strategy; the fold runs vectorised
  over each chunk when the combine function has a ufunc form.

Activity tracking (``track_active``) keeps an explicit frontier so work
shrinks with the frontier; switching it off processes every vertex each
superstep, which suits algorithms that touch all vertices anyway.

Threading note: workers are OS threads. Under CPython they interleave
rather than run in parallel, which exercises every synchronisation path
(locks, CAS retries, barriers) without changing semantics.
"""

from __future__ import annotations

import threading
import time
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable

import numpy as np

from .errors import ConfigError, ExecutionError
from .graph import Graph, gather_adjacency
from .layout import LayoutMode, VertexStore
from .mailbox import CombineFn, CombinerKind, Mailbox
from .scheduler import (ChunkClaimer, SchedulerKind, SchedulerMode,
                        edge_balanced_partition, static_partition)

DEFAULT_MAX_SUPERSTEPS = 10_000

# cap on the temporary index array used when scattering broadcast
# visibility to receivers (keeps peak memory flat on huge frontiers)
_SCATTER_BLOCK = 1 << 18


class CommMode(Enum):
    PUSH = "push"
    PULL = "pull"


@dataclass(frozen=True)
class VertexProgram:
    """A vertex-centric algorithm, ready to hand to :func:`run`.

    ``compute`` receives a :class:`VertexContext`. ``setup`` runs once
    before superstep 0 and may initialise state and seed initial messages
    straight into the mailbox's current buffer. ``on_superstep_end`` runs
    serially at each barrier (after all computes, before the frontier is
    derived); it is the hook for whole-graph bookkeeping between
    supersteps. ``extract`` turns the store into the run's result values
    (defaults to a copy of the state array).
    """

    compute: Callable[["VertexContext"], None]
    comm_mode: CommMode
    message_dtype: Any
    state_dtype: Any
    combine: CombineFn | None = None
    setup: Callable[[Graph, VertexStore, Mailbox], None] | None = None
    on_superstep_end: Callable[[int, VertexStore], None] | None = None
    extract: Callable[[VertexStore], np.ndarray] | None = None
    track_active: bool = True
    name: str = ""


@dataclass(frozen=True)
class EngineConfig:
    workers: int = 1
    scheduler: SchedulerMode = field(default_factory=SchedulerMode.static)
    layout: LayoutMode = LayoutMode.INTERLEAVED
    combiner: CombinerKind = CombinerKind.HYBRID
    max_supersteps: int = DEFAULT_MAX_SUPERSTEPS
    validate_phases: bool = False


@dataclass(frozen=True)
class SuperstepStats:
    index: int
    active_count: int
    messages_sent: int
    seconds: float


@dataclass(frozen=True)
class RunReport:
    values: np.ndarray
    superstep_count: int
    supersteps: list[SuperstepStats]
    wall_seconds: float
    hit_superstep_cap: bool


# ======================================================================
# Per-worker execution context
# ======================================================================

class VertexContext:
    """The view a compute function gets of the running superstep.

    One context exists per worker; the engine repoints ``vertex`` and
    ``message`` before each compute call. ``state`` is the whole state
    array (index it with ``vertex``); a compute may only write its own
    vertex's entry.
    """

    __slots__ = ("superstep", "vertex", "message", "state",
                 "_halted", "_push", "_send_fn", "_next_flags",
                 "_next_values", "_sent",
                 "_out_offsets", "_out_targets", "_in_offsets", "_in_targets")

    def __init__(self, graph: Graph, store: VertexStore, push: bool):
        self.superstep = 0
        self.vertex = 0
        self.message = None
        self.state = store.state
        self._halted = store.halted
        self._push = push
        self._send_fn = None
        self._next_flags = None
        self._next_values = None
        self._sent = 0
        self._out_offsets = graph.out_offsets
        self._out_targets = graph.out_targets
        self._in_offsets = graph.in_offsets
        self._in_targets = graph.in_targets

    # ---- messaging ----------------------------------------------------

    def send(self, dst: int, msg) -> None:
        """Push ``msg`` to vertex ``dst`` for the next superstep."""
        if not self._push:
            raise ConfigError("send() needs PUSH mode; this program is PULL")
        self._send_fn(dst, msg)
        self._sent += 1

    def send_to_out_neighbors(self, msg) -> None:
        if not self._push:
            raise ConfigError("send() needs PUSH mode; this program is PULL")
        send = self._send_fn
        v = self.vertex
        nbrs = self._out_targets[self._out_offsets[v]:self._out_offsets[v + 1]]
        for dst in nbrs.tolist():
            send(dst, msg)
        self._sent += len(nbrs)

    def broadcast(self, value) -> None:
        """Publish one value readable by all out-neighbours next superstep."""
        if self._push:
            raise ConfigError("broadcast() needs PULL mode; this program is PUSH")
        v = self.vertex
        self._next_values[v] = value
        self._next_flags[v] = True
        self._sent += 1

    def vote_to_halt(self) -> None:
        self._halted[self.vertex] = True

    # ---- topology -----------------------------------------------------

    def out_neighbors(self) -> np.ndarray:
        v = self.vertex
        return self._out_targets[self._out_offsets[v]:self._out_offsets[v + 1]]

    def in_neighbors(self) -> np.ndarray:
        v = self.vertex
        return self._in_targets[self._in_offsets[v]:self._in_offsets[v + 1]]

    @property
    def out_degree(self) -> int:
        v = self.vertex
        return int(self._out_offsets[v + 1] - self._out_offsets[v])

    @property
    def in_degree(self) -> int:
        v = self.vertex
        return int(self._in_offsets[v + 1] - self._in_offsets[v])


# ======================================================================
# Executor
# ======================================================================

def run(graph: Graph, program: VertexProgram,
        config: EngineConfig | None = None) -> RunReport:
    """Execute ``program`` on ``graph`` until quiescence or the cap."""
    return _Executor(graph, program, config or EngineConfig()).run()


class _Executor:

    def __init__(self, graph: Graph, program: VertexProgram,
                 config: EngineConfig):
        _validate(program, config)
        self.graph = graph
        self.program = program
        self.config = config
        self.push = program.comm_mode is CommMode.PUSH

        self.store = VertexStore(graph.vertex_count, program.message_dtype,
                                 program.state_dtype, config.layout)
        # pull mode has no concurrent sends, so the combiner strategy is
        # moot there; LOCK avoids the CAS strategy's neutral requirement
        kind = config.combiner if self.push else CombinerKind.LOCK
        self.mailbox = Mailbox(self.store, program.combine, kind,
                               guarded=config.validate_phases)
        if self.push:
            _ = self.store.locks  # materialise before threads exist

        # degrees in the direction messages flow, for edge balancing
        if config.scheduler.kind is SchedulerKind.EDGE_BALANCED:
            self.work_degrees = (graph.out_degrees if self.push
                                 else graph.in_degrees)
        else:
            self.work_degrees = None

        w = config.workers
        self.contexts = [VertexContext(graph, self.store, self.push)
                         for _ in range(w)]
        self._start = threading.Barrier(w + 1)
        self._end = threading.Barrier(w + 1)
        self._shutdown = False
        self._errors: list[tuple[int, BaseException]] = []
        self._threads = [threading.Thread(target=self._worker_loop,
                                          args=(i,), daemon=True,
                                          name=f"pregelite-w{i}")
                         for i in range(w)]

        # per-superstep shared slots, set by the main thread at the barrier
        self._active: np.ndarray | None = None
        self._partition = None
        self._claimer: ChunkClaimer | None = None
        self._cur_flags: np.ndarray | None = None
        self._cur_values: np.ndarray | None = None

    # ---- main loop ----------------------------------------------------

    def run(self) -> RunReport:
        graph, program, config = self.graph, self.program, self.config
        n = graph.vertex_count
        if program.setup is not None:
            program.setup(graph, self.store, self.mailbox)
        self.mailbox.prepare()

        all_ids = np.arange(n, dtype=np.int64)
        active = all_ids
        stats: list[SuperstepStats] = []
        hit_cap = False
        t_run = time.perf_counter()

        for t in self._threads:
            t.start()
        try:
            for step in range(config.max_supersteps):
                t0 = time.perf_counter()
                self._stage_superstep(step, active)
                self._start.wait()
                self._end.wait()
                self.mailbox.next.accepting = False
                if self._errors:
                    wid, exc = self._errors[0]
                    raise ExecutionError(
                        f"worker {wid} failed in superstep {step}") from exc
                if program.on_superstep_end is not None:
                    program.on_superstep_end(step, self.store)

                sent = sum(ctx._sent for ctx in self.contexts)
                stats.append(SuperstepStats(step, int(active.shape[0]),
                                            sent, time.perf_counter() - t0))

                if program.track_active:
                    nxt = self._next_frontier()
                    done = nxt.shape[0] == 0
                else:
                    nxt = all_ids
                    done = (not self.mailbox.next.flags.any()
                            and bool(self.store.halted.all()))
                if done:
                    break
                self.mailbox.swap_buffers()
                active = nxt
            else:
                hit_cap = True
        finally:
            self._shutdown = True
            try:
                self._start.wait(timeout=5.0)
            except threading.BrokenBarrierError:
                self._start.abort()
            for t in self._threads:
                t.join()

        values = (program.extract(self.store) if program.extract is not None
                  else self.store.state.copy())
        return RunReport(values=values,
                         superstep_count=len(stats),
                         supersteps=stats,
                         wall_seconds=time.perf_counter() - t_run,
                         hit_superstep_cap=hit_cap)

    def _stage_superstep(self, step: int, active: np.ndarray) -> None:
        """Publish this superstep's work description to the workers."""
        config = self.config
        mode = config.scheduler
        n_active = int(active.shape[0])
        self._active = active
        if mode.kind is SchedulerKind.DYNAMIC:
            self._claimer = ChunkClaimer(n_active, mode.chunk_size)
            self._partition = None
        elif mode.kind is SchedulerKind.EDGE_BALANCED:
            self._partition = edge_balanced_partition(
                self.work_degrees[active], config.workers)
            self._claimer = None
        else:
            self._partition = static_partition(n_active, config.workers)
            self._claimer = None

        cur, nxt = self.mailbox.current, self.mailbox.next
        self._cur_flags = cur.flags
        self._cur_values = cur.values
        nxt.accepting = True
        sender = self.mailbox.sender() if self.push else None
        for ctx in self.contexts:
            ctx.superstep = step
            ctx._sent = 0
            if self.push:
                ctx._send_fn = sender
            else:
                ctx._next_flags = nxt.flags
                ctx._next_values = nxt.values

    def _next_frontier(self) -> np.ndarray:
        """Vertices live in the next superstep: unhalted or message-woken."""
        halted = self.store.halted
        pending = self.mailbox.next.flags
        if self.push:
            # pushed messages address their receiver directly
            return np.flatnonzero(pending | ~halted)
        # a broadcast is visible to the publisher's out-neighbours
        woken = ~halted
        publishers = np.flatnonzero(pending)
        graph = self.graph
        for i in range(0, publishers.shape[0], _SCATTER_BLOCK):
            block = publishers[i:i + _SCATTER_BLOCK]
            flat, _ = gather_adjacency(graph.out_offsets, graph.out_targets,
                                       block)
            woken[flat] = True
        return np.flatnonzero(woken)

    # ---- worker side ----------------------------------------------------

    def _worker_loop(self, wid: int) -> None:
        ctx = self.contexts[wid]
        while True:
            try:
                self._start.wait()
            except threading.BrokenBarrierError:
                return
            if self._shutdown:
                return
            try:
                self._run_phase(wid, ctx)
            except BaseException as exc:  # surface to the main thread
                self._errors.append((wid, exc))
            finally:
                self._end.wait()

    def _run_phase(self, wid: int, ctx: VertexContext) -> None:
        active = self._active
        claimer = self._claimer
        if claimer is not None:
            while (rng := claimer.claim()) is not None:
                self._process_chunk(ctx, active[rng[0]:rng[1]])
        else:
            lo, hi = self._partition.block(wid)
            if lo < hi:
                self._process_chunk(ctx, active[lo:hi])

    def _process_chunk(self, ctx: VertexContext, ids: np.ndarray) -> None:
        if self.push:
            self._chunk_push(ctx, ids)
        else:
            self._chunk_pull(ctx, ids)

    def _chunk_push(self, ctx: VertexContext, ids: np.ndarray) -> None:
        got = self._cur_flags[ids]
        any_msg = bool(got.any())
        if any_msg:
            msgs = self._cur_values[ids].tolist()
            self._cur_flags[ids] = False  # consume
        self.store.halted[ids] = False    # computing vertices are awake
        compute = self.program.compute
        got_l = got.tolist()
        for i, v in enumerate(ids.tolist()):
            ctx.vertex = v
            ctx.message = msgs[i] if any_msg and got_l[i] else None
            compute(ctx)

    def _chunk_pull(self, ctx: VertexContext, ids: np.ndarray) -> None:
        has_l, msgs_l = self._fold_chunk(ids)
        self.store.halted[ids] = False
        compute = self.program.compute
        for i, v in enumerate(ids.tolist()):
            ctx.vertex = v
            ctx.message = msgs_l[i] if has_l[i] else None
            compute(ctx)

    def _fold_chunk(self, ids: np.ndarray) -> tuple[list, list]:
        """Combine in-neighbour broadcasts for every vertex of the chunk.

        Vectorised: gathers all in-adjacency rows at once, selects flagged
        slots, folds each row's segment with the combine ufunc. Fold order
        within a row is adjacency order, independent of chunk boundaries,
        so results do not depend on the scheduler.
        """
        k = int(ids.shape[0])
        graph = self.graph
        flat, lens = gather_adjacency(graph.in_offsets, graph.in_targets, ids)
        if flat.shape[0] == 0:
            return [False] * k, [None] * k
        flagged = self._cur_flags[flat]
        seg = np.zeros(k + 1, dtype=np.int64)
        np.cumsum(lens, out=seg[1:])
        fcum = np.zeros(flat.shape[0] + 1, dtype=np.int64)
        np.cumsum(flagged, out=fcum[1:])
        counts = fcum[seg[1:]] - fcum[seg[:-1]]
        has = counts > 0
        if not has.any():
            return [False] * k, [None] * k

        vals = self._cur_values[flat[flagged]]
        combine = self.program.combine
        if combine is not None and combine.ufunc is not None:
            starts = fcum[seg[:-1]][has]
            folded = combine.ufunc.reduceat(vals, starts)
        else:
            folded = self._fold_rows_python(vals, counts[has])
        full = np.zeros(k, dtype=vals.dtype)
        full[has] = folded
        return has.tolist(), full.tolist()

    def _fold_rows_python(self, vals: np.ndarray,
                          row_counts: np.ndarray) -> np.ndarray:
        fn = self.program.combine.fn if self.program.combine else None
        if fn is None:
            raise ConfigError("pull mode needs a combine function to fold "
                              "multiple incoming broadcasts")
        out = np.empty(row_counts.shape[0], dtype=vals.dtype)
        vals_l = vals.tolist()
        pos = 0
        for r, cnt in enumerate(row_counts.tolist()):
            acc = vals_l[pos]
            for j in range(pos + 1, pos + cnt):
                acc = fn(acc, vals_l[j])
            out[r] = acc
            pos += cnt
        return out


def _validate(program: VertexProgram, config: EngineConfig) -> None:
    if config.workers < 1:
        raise ConfigError(f"worker count must be >= 1, got {config.workers}")
    if config.max_supersteps < 1:
        raise ConfigError(
            f"superstep cap must be >= 1, got {config.max_supersteps}")
    if not isinstance(config.scheduler, SchedulerMode):
        raise ConfigError(f"bad scheduler mode: {config.scheduler!r}")
    if not isinstance(config.layout, LayoutMode):
        raise ConfigError(f"bad layout mode: {config.layout!r}")
    if not isinstance(config.combiner, CombinerKind):
        raise ConfigError(f"bad combiner kind: {config.combiner!r}")
    if program.comm_mode is CommMode.PUSH and program.combine is None:
        raise ConfigError("push-mode programs must declare a combine function")
