"""Reference implementations used to validate engine results.

These functions work directly on raw edge arrays with deliberately
different machinery than the engine (dense ``bincount`` folds, union-find,
level-synchronous edge scans) so agreement is meaningful. All take the
*stored* directed edge list: for a graph loaded undirected, pass both
directions (e.g. the arrays the graph was built from, concatenated with
their swap).
"""

from __future__ import annotations

import numpy as np

from .algorithms import DEFAULT_DAMPING, DEFAULT_ITERATIONS, UNREACHED


def pagerank_reference(src: np.ndarray, dst: np.ndarray, n: int,
                       iterations: int = DEFAULT_ITERATIONS,
                       damping: float = DEFAULT_DAMPING) -> np.ndarray:
    """Dense power iteration with uniform dangling-mass redistribution."""
    src = np.asarray(src, dtype=np.int64)
    dst = np.asarray(dst, dtype=np.int64)
    if n == 0:
        return np.empty(0, dtype=np.float64)
    outdeg = np.bincount(src, minlength=n).astype(np.float64)
    spreads = outdeg > 0
    rank = np.full(n, 1.0 / n, dtype=np.float64)
    base = (1.0 - damping) / n
    for _ in range(iterations):
        share = np.zeros(n, dtype=np.float64)
        share[spreads] = rank[spreads] / outdeg[spreads]
        pulled = np.bincount(dst, weights=share[src], minlength=n)
        dangling = rank[~spreads].sum()
        rank = base + damping * (pulled + dangling / n)
    return rank


def components_reference(src: np.ndarray, dst: np.ndarray,
                         n: int) -> np.ndarray:
    """Union-find component labels; each label is its component's min id.

    Edge direction is ignored, matching the propagation algorithm's
    behaviour on symmetric graphs.
    """
    parent = list(range(n))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]  # path halving
            x = parent[x]
        return x

    for a, b in zip(np.asarray(src).tolist(), np.asarray(dst).tolist()):
        ra, rb = find(a), find(b)
        if ra != rb:
            if ra < rb:
                parent[rb] = ra
            else:
                parent[ra] = rb

    labels = np.fromiter((find(v) for v in range(n)), dtype=np.int64, count=n)
    # normalise every component to its minimum member id
    mins = np.full(n, n, dtype=np.int64)
    np.minimum.at(mins, labels, np.arange(n, dtype=np.int64))
    return mins[labels] if n else labels


def bfs_distances_reference(src: np.ndarray, dst: np.ndarray, n: int,
                            source: int) -> np.ndarray:
    """Level-synchronous BFS by whole-edge-list scans (no adjacency index)."""
    src = np.asarray(src, dtype=np.int64)
    dst = np.asarray(dst, dtype=np.int64)
    dist = np.full(n, UNREACHED, dtype=np.uint32)
    if not 0 <= source < n:
        raise IndexError(f"source {source} out of range [0, {n})")
    dist[source] = 0
    level = 0
    while True:
        on_frontier = dist[src] == level
        if not on_frontier.any():
            break
        reached = dst[on_frontier]
        fresh = reached[dist[reached] == UNREACHED]
        if fresh.size == 0:
            break
        dist[fresh] = level + 1
        level += 1
    return dist
