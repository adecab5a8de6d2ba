"""Built-in vertex programs: PageRank, connected components, SSSP.

Each factory returns a :class:`~pregelite.engine.VertexProgram` whose
communication mode matches the algorithm's natural shape: PageRank and
component labelling read all in-neighbour values every round (pull /
broadcast), unweighted SSSP touches only the frontier's out-edges (push
with a min combiner).
"""

from __future__ import annotations

import numpy as np

from .engine import CommMode, VertexContext, VertexProgram
from .errors import ConfigError
from .graph import Graph
from .layout import VertexStore
from .mailbox import Mailbox, min_combine, sum_combine

#: distance value of vertices no path reaches
UNREACHED = int(np.iinfo(np.uint32).max)

DEFAULT_DAMPING = 0.85
DEFAULT_ITERATIONS = 10


def pagerank(iterations: int = DEFAULT_ITERATIONS,
             damping: float = DEFAULT_DAMPING) -> VertexProgram:
    """Power-iteration PageRank over a fixed superstep budget.

    Every superstep advances the ranks by exactly one power step: a vertex
    folds the rank shares broadcast by its in-neighbours, adds the evenly
    redistributed mass of dangling (zero out-degree) vertices, applies
    damping, and broadcasts its new share. The run takes exactly
    ``iterations`` supersteps; ranks always sum to 1.
    """
    if iterations < 1:
        raise ConfigError(f"iterations must be >= 1, got {iterations}")
    if not 0.0 <= damping <= 1.0:
        raise ConfigError(f"damping must be in [0, 1], got {damping}")
    cell = {"n": 0, "base": 0.0, "dangling": 0.0, "dangling_mask": None}
    last = iterations - 1

    def setup(graph: Graph, store: VertexStore, mailbox: Mailbox) -> None:
        n = graph.vertex_count
        cell["n"] = n
        if n == 0:
            return
        cell["base"] = (1.0 - damping) / n
        r0 = 1.0 / n
        store.state.fill(r0)
        outdeg = graph.out_degrees
        spreads = outdeg > 0
        cell["dangling_mask"] = dangling = ~spreads
        cell["dangling"] = r0 * int(dangling.sum())
        # seed the initial broadcast so superstep 0 already folds r0 shares
        cur = mailbox.current
        cur.values[spreads] = r0 / outdeg[spreads]
        cur.flags[spreads] = True

    def compute(ctx: VertexContext) -> None:
        v = ctx.vertex
        folded = ctx.message
        n = cell["n"]
        rank = cell["base"] + damping * (
            (folded if folded is not None else 0.0) + cell["dangling"] / n)
        ctx.state[v] = rank
        if ctx.superstep == last:
            ctx.vote_to_halt()
        else:
            d = ctx.out_degree
            if d:
                ctx.broadcast(rank / d)

    def on_superstep_end(step: int, store: VertexStore) -> None:
        mask = cell["dangling_mask"]
        if mask is not None:
            cell["dangling"] = float(store.state[mask].sum())

    return VertexProgram(compute=compute, comm_mode=CommMode.PULL,
                         message_dtype=np.float64, state_dtype=np.float64,
                         combine=sum_combine(np.float64), setup=setup,
                         on_superstep_end=on_superstep_end,
                         track_active=False, name="pagerank")


def connected_components() -> VertexProgram:
    """Label propagation toward the minimum vertex id of each component.

    Superstep 0 broadcasts each vertex's own id; afterwards a vertex
    adopts any smaller label it folds in and rebroadcasts only on a
    decrease, so activity dies out as labels settle. Meaningful on graphs
    loaded undirected (labels spread along edge direction only).
    """

    def setup(graph: Graph, store: VertexStore, mailbox: Mailbox) -> None:
        store.state[:] = np.arange(graph.vertex_count, dtype=np.int64)

    def compute(ctx: VertexContext) -> None:
        v = ctx.vertex
        if ctx.superstep == 0:
            ctx.broadcast(ctx.state[v])
        else:
            m = ctx.message
            if m is not None and m < ctx.state[v]:
                ctx.state[v] = m
                ctx.broadcast(m)
        ctx.vote_to_halt()

    return VertexProgram(compute=compute, comm_mode=CommMode.PULL,
                         message_dtype=np.int64, state_dtype=np.int64,
                         combine=min_combine(np.int64), setup=setup,
                         track_active=True, name="components")


def sssp(source: int) -> VertexProgram:
    """Unweighted single-source shortest paths (hop counts).

    Push mode with a min combiner: the source seeds distance 0 in
    superstep 0 and sends ``1`` to its out-neighbours; a vertex adopting a
    shorter distance relays ``distance + 1``. Distances are uint32 with
    :data:`UNREACHED` marking vertices no path touches. Every compute
    votes to halt, so the run ends one superstep after the last
    improvement stops producing messages.
    """
    if source < 0:
        raise ConfigError(f"source must be a vertex id >= 0, got {source}")

    def setup(graph: Graph, store: VertexStore, mailbox: Mailbox) -> None:
        if source >= graph.vertex_count:
            raise ConfigError(
                f"source vertex {source} out of range "
                f"[0, {graph.vertex_count})")
        store.state.fill(UNREACHED)

    def compute(ctx: VertexContext) -> None:
        v = ctx.vertex
        if ctx.superstep == 0:
            if v == source:
                ctx.state[v] = 0
                ctx.send_to_out_neighbors(1)
        else:
            m = ctx.message
            if m is not None and m < ctx.state[v]:
                ctx.state[v] = m
                ctx.send_to_out_neighbors(m + 1)
        ctx.vote_to_halt()

    return VertexProgram(compute=compute, comm_mode=CommMode.PUSH,
                         message_dtype=np.uint32, state_dtype=np.uint32,
                         combine=min_combine(np.uint32), setup=setup,
                         track_active=True, name="sssp")
