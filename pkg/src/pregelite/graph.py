"""Immutable CSR graph container and edge-list ingestion.

The on-disk input format is the plain whitespace edge list used by the big
public graph snapshots: ``#`` starts a comment, every other line carries at
least two integer tokens ``src dst`` (extra tokens are ignored). Vertex ids
in the file can be arbitrary non-negative integers; they are densified to
``0..n-1`` in order of first appearance, and the mapping back to the
original ids is kept on the graph.

Internally a :class:`Graph` stores both adjacency directions as CSR
(offsets + targets), with each vertex's targets sorted ascending. Arrays are
marked read-only after construction so a graph can be shared freely between
worker threads.
"""

from __future__ import annotations

import io
import os
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np
import pandas as pd

from .errors import GraphLoadError

_OFFSET_DTYPE = np.dtype("<i8")

# Binary CSR cache: magic + version, then the header/payload described in
# save_cache(). Bump the version byte on any layout change.
_CACHE_MAGIC = b"PGLCSR1\n"


# ======================================================================
# Container
# ======================================================================

@dataclass
class Graph:
    """A directed multigraph in CSR form, with its transpose.

    ``edge_count`` counts stored (directed) edges; a graph loaded with
    ``undirected=True`` stores each input edge in both directions, so its
    ``edge_count`` is twice the number of input lines.
    """

    vertex_count: int
    out_offsets: np.ndarray   # int64, len vertex_count + 1
    out_targets: np.ndarray   # id dtype, len edge_count, sorted per source
    in_offsets: np.ndarray
    in_targets: np.ndarray    # sorted per destination
    id_map: np.ndarray | None = None   # dense id -> original file id
    source_path: str | None = field(default=None, compare=False)

    @property
    def edge_count(self) -> int:
        return int(self.out_targets.shape[0])

    @property
    def id_dtype(self) -> np.dtype:
        return self.out_targets.dtype

    def out_neighbors(self, v: int) -> np.ndarray:
        self._check_vertex(v)
        return self.out_targets[self.out_offsets[v]:self.out_offsets[v + 1]]

    def in_neighbors(self, v: int) -> np.ndarray:
        self._check_vertex(v)
        return self.in_targets[self.in_offsets[v]:self.in_offsets[v + 1]]

    def out_degree(self, v: int) -> int:
        self._check_vertex(v)
        return int(self.out_offsets[v + 1] - self.out_offsets[v])

    def in_degree(self, v: int) -> int:
        self._check_vertex(v)
        return int(self.in_offsets[v + 1] - self.in_offsets[v])

    @cached_property
    def out_degrees(self) -> np.ndarray:
        d = np.diff(self.out_offsets)
        d.flags.writeable = False
        return d

    @cached_property
    def in_degrees(self) -> np.ndarray:
        d = np.diff(self.in_offsets)
        d.flags.writeable = False
        return d

    def original_ids(self, dense: np.ndarray) -> np.ndarray:
        """Map dense vertex ids back to the ids used in the input file."""
        if self.id_map is None:
            return np.asarray(dense)
        return self.id_map[dense]

    def _check_vertex(self, v: int) -> None:
        # numpy would accept negative indices by wrapping, which is never
        # what a caller means by a vertex id.
        if not 0 <= v < self.vertex_count:
            raise IndexError(f"vertex id {v} out of range [0, {self.vertex_count})")

    def __repr__(self) -> str:  # keep huge arrays out of test failure output
        return (f"Graph(vertex_count={self.vertex_count}, "
                f"edge_count={self.edge_count}, id_dtype={self.id_dtype})")


@dataclass(frozen=True)
class DegreeStats:
    """Degree summary for one adjacency direction.

    ``prefix`` is the inclusive prefix sum of per-vertex degrees in vertex
    order; ``prefix[-1]`` equals the stored edge count. Used by the
    edge-balanced partitioner, which splits work on cumulative edge counts
    rather than vertex counts.
    """

    degrees: np.ndarray
    prefix: np.ndarray
    min_degree: int
    max_degree: int
    mean_degree: float


def degree_prefix_sums(graph: Graph, *, incoming: bool = False) -> DegreeStats:
    degrees = graph.in_degrees if incoming else graph.out_degrees
    prefix = np.cumsum(degrees, dtype=np.int64)
    prefix.flags.writeable = False
    if degrees.size == 0:
        return DegreeStats(degrees, prefix, 0, 0, 0.0)
    return DegreeStats(degrees, prefix,
                       int(degrees.min()), int(degrees.max()),
                       float(degrees.mean()))


# ======================================================================
# Construction
# ======================================================================

def from_edges(src: np.ndarray, dst: np.ndarray, vertex_count: int, *,
               undirected: bool = False,
               id_dtype: np.dtype | type = np.int32) -> Graph:
    """Build a graph from parallel dense-id edge arrays.

    Every id must already be in ``[0, vertex_count)``. Duplicate edges and
    self-loops are kept verbatim; with ``undirected=True`` each input edge
    (self-loops included) is stored in both directions.
    """
    src = np.ascontiguousarray(src, dtype=np.int64)
    dst = np.ascontiguousarray(dst, dtype=np.int64)
    if src.shape != dst.shape or src.ndim != 1:
        raise GraphLoadError("src/dst must be 1-d arrays of equal length")
    if vertex_count < 0:
        raise GraphLoadError(f"vertex_count must be >= 0, got {vertex_count}")
    id_dtype = np.dtype(id_dtype)
    if not np.issubdtype(id_dtype, np.integer):
        raise GraphLoadError(f"id dtype must be an integer type, got {id_dtype}")
    if vertex_count > 0 and vertex_count - 1 > np.iinfo(id_dtype).max:
        raise GraphLoadError(
            f"vertex count {vertex_count} does not fit id dtype {id_dtype}")
    if src.size:
        lo = min(src.min(), dst.min())
        hi = max(src.max(), dst.max())
        if lo < 0 or hi >= vertex_count:
            raise GraphLoadError(
                f"edge endpoint {lo if lo < 0 else hi} outside [0, {vertex_count})")

    if undirected and src.size:
        src, dst = np.concatenate([src, dst]), np.concatenate([dst, src])

    out_offsets, out_targets = _csr(src, dst, vertex_count, id_dtype)
    in_offsets, in_targets = _csr(dst, src, vertex_count, id_dtype)
    g = Graph(vertex_count, out_offsets, out_targets, in_offsets, in_targets)
    _freeze(g)
    return g


def _csr(key: np.ndarray, val: np.ndarray, n: int,
         id_dtype: np.dtype) -> tuple[np.ndarray, np.ndarray]:
    counts = np.bincount(key, minlength=n) if key.size else np.zeros(n, np.int64)
    offsets = np.zeros(n + 1, dtype=_OFFSET_DTYPE)
    np.cumsum(counts, out=offsets[1:])
    # lexsort's last key is primary: group by source, targets ascending within
    order = np.lexsort((val, key))
    targets = val[order].astype(id_dtype)
    return offsets, targets


def _freeze(g: Graph) -> None:
    for arr in (g.out_offsets, g.out_targets, g.in_offsets, g.in_targets, g.id_map):
        if arr is not None:
            arr.flags.writeable = False


def densify_ids(src: np.ndarray, dst: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Map raw integer ids to ``0..n-1`` in first-appearance order.

    Appearance order follows the line stream: on a line ``a b``, ``a`` is
    seen before ``b``. Returns ``(dense_src, dense_dst, id_map)``.
    """
    raw = np.empty(src.size * 2, dtype=np.int64)
    raw[0::2] = src
    raw[1::2] = dst
    sorted_ids, first_pos, inverse = np.unique(raw, return_index=True,
                                               return_inverse=True)
    appearance = np.argsort(first_pos, kind="stable")
    rank = np.empty(appearance.size, dtype=np.int64)
    rank[appearance] = np.arange(appearance.size)
    dense = rank[inverse]
    return dense[0::2], dense[1::2], sorted_ids[appearance]


# ======================================================================
# Edge-list loading
# ======================================================================

def load_edge_list(path: str | os.PathLike, *, undirected: bool = False,
                   id_dtype: np.dtype | type = np.int32) -> Graph:
    """Parse a whitespace edge-list file into a :class:`Graph`.

    Raises :class:`GraphLoadError` with the offending line number for
    malformed input (fewer than two tokens, non-integer or negative ids).
    A file with no edges yields an empty graph.
    """
    path = os.fspath(path)
    try:
        raw_src, raw_dst = _parse_fast(path)
    except (pd.errors.ParserError, ValueError, OverflowError):
        raw_src, raw_dst = _parse_lines(path)
    if raw_src.size and min(raw_src.min(), raw_dst.min()) < 0:
        _parse_lines(path)  # re-parse for a precise line number
        raise GraphLoadError(f"{path}: negative vertex id")  # pragma: no cover

    if raw_src.size == 0:
        g = from_edges(raw_src, raw_dst, 0, id_dtype=id_dtype)
    else:
        src, dst, id_map = densify_ids(raw_src, raw_dst)
        g = from_edges(src, dst, int(id_map.size),
                       undirected=undirected, id_dtype=id_dtype)
        g.id_map = id_map
        id_map.flags.writeable = False
    g.source_path = path
    return g


def _parse_fast(path: str) -> tuple[np.ndarray, np.ndarray]:
    """pandas C-engine parse for well-formed two-column files."""
    try:
        df = pd.read_csv(path, sep=r"\s+", comment="#", header=None,
                         dtype=np.int64, engine="c")
    except pd.errors.EmptyDataError:
        return np.empty(0, np.int64), np.empty(0, np.int64)
    except FileNotFoundError as e:
        raise GraphLoadError(f"{path}: {e.strerror}") from e
    if df.shape[1] < 2:
        raise ValueError("fewer than two columns")
    return df.iloc[:, 0].to_numpy(), df.iloc[:, 1].to_numpy()


def _parse_lines(path: str) -> tuple[np.ndarray, np.ndarray]:
    """Line-by-line fallback: slower, tolerates ragged rows, reports the
    exact line of the first malformed record."""
    src: list[int] = []
    dst: list[int] = []
    try:
        fh = open(path, "rt", encoding="utf-8", errors="replace")
    except OSError as e:
        raise GraphLoadError(f"{path}: {e.strerror}") from e
    with fh:
        for lineno, line in enumerate(fh, 1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            tokens = stripped.split()
            if len(tokens) < 2:
                raise GraphLoadError(
                    f"{path}:{lineno}: expected at least two vertex ids, "
                    f"got {len(tokens)} token(s)")
            try:
                a, b = int(tokens[0]), int(tokens[1])
            except ValueError:
                raise GraphLoadError(
                    f"{path}:{lineno}: non-integer vertex id "
                    f"{tokens[0]!r} {tokens[1]!r}") from None
            if a < 0 or b < 0:
                raise GraphLoadError(f"{path}:{lineno}: negative vertex id")
            src.append(a)
            dst.append(b)
    return (np.asarray(src, dtype=np.int64),
            np.asarray(dst, dtype=np.int64))


# ======================================================================
# Binary CSR cache
# ======================================================================

def save_cache(graph: Graph, path: str | os.PathLike) -> None:
    """Write a little-endian binary snapshot of the CSR arrays.

    Layout after the 8-byte magic: dtype tag (8 ascii bytes), u64
    vertex_count, u64 edge_count, u8 has_id_map + 7 pad bytes, then
    out_offsets, out_targets, in_offsets, in_targets, id_map (if present).
    """
    id_dt = graph.id_dtype.newbyteorder("<")
    header = io.BytesIO()
    header.write(_CACHE_MAGIC)
    header.write(id_dt.str.encode("ascii").ljust(8, b"\x00"))
    header.write(np.asarray([graph.vertex_count, graph.edge_count],
                            dtype="<u8").tobytes())
    header.write(bytes([1 if graph.id_map is not None else 0]) + b"\x00" * 7)

    tmp = os.fspath(path) + ".tmp"
    with open(tmp, "wb") as fh:
        fh.write(header.getvalue())
        fh.write(np.ascontiguousarray(graph.out_offsets, dtype="<i8").tobytes())
        fh.write(np.ascontiguousarray(graph.out_targets, dtype=id_dt).tobytes())
        fh.write(np.ascontiguousarray(graph.in_offsets, dtype="<i8").tobytes())
        fh.write(np.ascontiguousarray(graph.in_targets, dtype=id_dt).tobytes())
        if graph.id_map is not None:
            fh.write(np.ascontiguousarray(graph.id_map, dtype="<i8").tobytes())
    os.replace(tmp, path)


def load_cache(path: str | os.PathLike) -> Graph:
    """Read a snapshot written by :func:`save_cache`.

    Refuses files with a wrong magic/version or a truncated payload.
    """
    path = os.fspath(path)
    try:
        with open(path, "rb") as fh:
            blob = fh.read()
    except OSError as e:
        raise GraphLoadError(f"{path}: {e.strerror}") from e
    if len(blob) < 32 or blob[:8] != _CACHE_MAGIC:
        raise GraphLoadError(f"{path}: not a graph cache (bad magic/version)")
    try:
        id_dt = np.dtype(blob[8:16].rstrip(b"\x00").decode("ascii"))
    except (TypeError, UnicodeDecodeError) as e:
        raise GraphLoadError(f"{path}: unreadable id dtype tag") from e
    n, m = (int(x) for x in np.frombuffer(blob[16:32], dtype="<u8"))
    has_id_map = blob[32] == 1

    pos = 40

    def take(count: int, dtype: np.dtype) -> np.ndarray:
        nonlocal pos
        nbytes = count * dtype.itemsize
        if pos + nbytes > len(blob):
            raise GraphLoadError(f"{path}: truncated graph cache")
        arr = np.frombuffer(blob, dtype=dtype, count=count, offset=pos).copy()
        pos += nbytes
        return arr

    out_offsets = take(n + 1, np.dtype("<i8"))
    out_targets = take(m, id_dt)
    in_offsets = take(n + 1, np.dtype("<i8"))
    in_targets = take(m, id_dt)
    id_map = take(n, np.dtype("<i8")) if has_id_map else None
    if pos != len(blob):
        raise GraphLoadError(f"{path}: trailing bytes in graph cache")

    for offs in (out_offsets, in_offsets):
        if offs[0] != 0 or offs[-1] != m or np.any(np.diff(offs) < 0):
            raise GraphLoadError(f"{path}: corrupt offsets in graph cache")
    if m and (out_targets.max() >= n or in_targets.max() >= n
              or out_targets.min() < 0 or in_targets.min() < 0):
        raise GraphLoadError(f"{path}: target id out of range in graph cache")

    g = Graph(n, out_offsets, out_targets, in_offsets, in_targets, id_map)
    _freeze(g)
    return g


# ======================================================================
# Vectorised multi-row CSR gather
# ======================================================================

def gather_adjacency(offsets: np.ndarray, targets: np.ndarray,
                     ids: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Concatenate the adjacency slices of ``ids`` without a Python loop.

    Returns ``(flat, lengths)`` where ``flat`` is ``targets`` restricted to
    the rows of ``ids`` (row order preserved) and ``lengths[i]`` is the
    degree of ``ids[i]``. The heart of the pull-mode fold.
    """
    starts = offsets[ids]
    lengths = (offsets[ids + 1] - starts).astype(np.int64)
    total = int(lengths.sum())
    if total == 0:
        return targets[:0], lengths
    row_ends = np.cumsum(lengths)
    # index arithmetic: arange minus each row's flat start, plus its CSR start
    flat_idx = np.arange(total, dtype=np.int64)
    flat_idx += np.repeat(starts - (row_ends - lengths), lengths)
    return targets[flat_idx], lengths
