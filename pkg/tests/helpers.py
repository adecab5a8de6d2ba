"""Shared test utilities: edge-file writing, dict-based graph oracles,
and structural invariant checks."""

from __future__ import annotations

from collections import defaultdict

import numpy as np


def write_edge_file(path, pairs, header=None):
    with open(path, "w", encoding="utf-8") as fh:
        if header:
            fh.write(header)
        for a, b in pairs:
            fh.write(f"{a} {b}\n")
    return str(path)


def adjacency_dicts(src, dst, n, undirected=False):
    """Sorted dict-of-lists adjacency built edge by edge (the slow way)."""
    out_adj = defaultdict(list)
    in_adj = defaultdict(list)
    for a, b in zip(np.asarray(src).tolist(), np.asarray(dst).tolist()):
        out_adj[a].append(b)
        in_adj[b].append(a)
        if undirected:
            out_adj[b].append(a)
            in_adj[a].append(b)
    return ({v: sorted(out_adj[v]) for v in range(n)},
            {v: sorted(in_adj[v]) for v in range(n)})


def check_graph_invariants(g, src=None, dst=None, undirected=False):
    """Structural CSR invariants, plus adjacency equality when edges given."""
    n, m = g.vertex_count, g.edge_count
    for offsets, targets in ((g.out_offsets, g.out_targets),
                             (g.in_offsets, g.in_targets)):
        assert offsets.shape == (n + 1,)
        assert offsets[0] == 0 and offsets[-1] == m
        assert np.all(np.diff(offsets) >= 0)
        assert targets.shape == (m,)
        if m:
            assert targets.min() >= 0 and targets.max() < n
    # per-row sortedness: within each row consecutive targets never decrease
    for offsets, targets in ((g.out_offsets, g.out_targets),
                             (g.in_offsets, g.in_targets)):
        if m:
            inner = np.ones(m, dtype=bool)
            starts = offsets[1:-1]
            inner[starts[starts < m]] = False  # row starts may decrease
            d = np.diff(targets.astype(np.int64))
            assert np.all(d[inner[1:]] >= 0)
    # transpose consistency: out and in store the same directed multiset
    out_pairs = np.stack([np.repeat(np.arange(n), np.diff(g.out_offsets)),
                          g.out_targets.astype(np.int64)])
    in_pairs = np.stack([g.in_targets.astype(np.int64),
                         np.repeat(np.arange(n), np.diff(g.in_offsets))])
    order_a = np.lexsort(out_pairs)
    order_b = np.lexsort(in_pairs)
    assert np.array_equal(out_pairs[:, order_a], in_pairs[:, order_b])

    if src is not None:
        out_adj, in_adj = adjacency_dicts(src, dst, n, undirected)
        for v in range(n):
            assert g.out_neighbors(v).tolist() == out_adj[v]
            assert g.in_neighbors(v).tolist() == in_adj[v]


def fold_all(fn, values):
    acc = values[0]
    for v in values[1:]:
        acc = fn(acc, v)
    return acc
