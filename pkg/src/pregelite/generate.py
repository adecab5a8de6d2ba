"""Synthetic edge-list generators for tests and benchmarks.

All generators return raw ``(src, dst)`` arrays; build a graph with
:func:`pregelite.from_edges` (pass ``undirected=True`` to symmetrise).
Self-loops and duplicate edges may occur and are intentionally kept: the
ingestion path stores edge lists verbatim.
"""

from __future__ import annotations

import numpy as np


def erdos_renyi_edges(n: int, m: int,
                      rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """``m`` uniformly random directed edges over ``n`` vertices (G(n, m)-style)."""
    if n <= 0:
        return np.empty(0, np.int64), np.empty(0, np.int64)
    src = rng.integers(0, n, size=m, dtype=np.int64)
    dst = rng.integers(0, n, size=m, dtype=np.int64)
    return src, dst


def power_law_edges(n: int, m: int, rng: np.random.Generator,
                    alpha: float = 2.5,
                    skew_both_ends: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """``m`` edges whose endpoints follow a Zipf-like degree distribution.

    Vertex ``i`` is drawn with probability proportional to
    ``(i + 1) ** -alpha`` (after a fixed permutation so high-degree ids are
    scattered). ``skew_both_ends`` applies the skew to destinations too;
    otherwise destinations are uniform.
    """
    if n <= 0:
        return np.empty(0, np.int64), np.empty(0, np.int64)
    weights = (np.arange(1, n + 1, dtype=np.float64)) ** -alpha
    cdf = np.cumsum(weights)
    cdf /= cdf[-1]
    perm = rng.permutation(n)
    src = perm[np.searchsorted(cdf, rng.random(m), side="right")]
    if skew_both_ends:
        dst = perm[np.searchsorted(cdf, rng.random(m), side="right")]
    else:
        dst = rng.integers(0, n, size=m, dtype=np.int64)
    return src.astype(np.int64), dst.astype(np.int64)


def power_law_degrees(n: int, alpha: float, rng: np.random.Generator,
                      max_degree: int | None = None) -> np.ndarray:
    """A per-vertex degree sample from a Zipf(``alpha``) distribution."""
    deg = rng.zipf(alpha, size=n).astype(np.int64)
    if max_degree is not None:
        np.minimum(deg, max_degree, out=deg)
    return deg


def path_edges(n: int) -> tuple[np.ndarray, np.ndarray]:
    """The ``n - 1`` consecutive edges of an ``n``-vertex path."""
    ids = np.arange(n, dtype=np.int64)
    return ids[:-1], ids[1:]
