"""Benchmark harness: configured runs, A/B grids, and report emission.

The harness turns a :class:`HarnessConfig` into engine runs and
:class:`BenchmarkRecord` rows. A *grid* run executes a fixed family of
variants on one loaded graph (baseline, then each optimisation toggled
alone, then all together) so each mechanism's effect is visible in
isolation; speedups are reported against the baseline row's median.

Reports go to three sinks: a human-readable table on stdout, one JSON
object per record appended to a JSONL file, and a tab-separated
``vertex<TAB>value`` dump of the final run's results in original file ids.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import logging
import os
import statistics
import time
from dataclasses import dataclass, field

import numpy as np

from .algorithms import (DEFAULT_DAMPING, DEFAULT_ITERATIONS,
                         connected_components, pagerank, sssp)
from .engine import (DEFAULT_MAX_SUPERSTEPS, CommMode, EngineConfig,
                     RunReport, VertexProgram, run)
from .errors import ConfigError, GraphLoadError, ValidationError
from .graph import Graph, load_cache, load_edge_list, save_cache
from .layout import LayoutMode
from .mailbox import CombinerKind
from .oracles import (bfs_distances_reference, components_reference,
                      pagerank_reference)
from .scheduler import DEFAULT_CHUNK_SIZE, SchedulerKind, SchedulerMode

logger = logging.getLogger("pregelite.harness")

CACHE_DIR_ENV = "PREGELITE_CACHE_DIR"

ALGORITHMS = ("pagerank", "components", "sssp")
LAYOUTS = tuple(m.value for m in LayoutMode)
COMBINERS = tuple(k.value for k in CombinerKind)
SCHEDULERS = tuple(k.value for k in SchedulerKind)


@dataclass
class HarnessConfig:
    """Everything one invocation needs; mirrors the CLI flag for flag."""

    graph: str
    algorithm: str
    undirected: bool = False
    workers: int = 1
    layout: str = "interleaved"
    combiner: str = "hybrid"
    scheduler: str = "static"
    chunk_size: int = DEFAULT_CHUNK_SIZE
    iterations: int = DEFAULT_ITERATIONS
    damping: float = DEFAULT_DAMPING
    source: int = 0
    repeats: int = 3
    max_supersteps: int = DEFAULT_MAX_SUPERSTEPS
    validate: bool = False
    grid: bool = False
    records_out: str | None = None
    results_out: str | None = None
    cache_dir: str | None = field(
        default_factory=lambda: os.environ.get(CACHE_DIR_ENV))

    def check(self) -> None:
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {self.algorithm!r}; "
                              f"expected one of {ALGORITHMS}")
        if self.layout not in LAYOUTS:
            raise ConfigError(f"unknown layout {self.layout!r}; "
                              f"expected one of {LAYOUTS}")
        if self.combiner not in COMBINERS:
            raise ConfigError(f"unknown combiner {self.combiner!r}; "
                              f"expected one of {COMBINERS}")
        if self.scheduler not in SCHEDULERS:
            raise ConfigError(f"unknown scheduler {self.scheduler!r}; "
                              f"expected one of {SCHEDULERS}")
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        if self.repeats < 1:
            raise ConfigError(f"repeats must be >= 1, got {self.repeats}")
        if self.chunk_size < 1:
            raise ConfigError(f"chunk-size must be >= 1, got {self.chunk_size}")
        if self.max_supersteps < 1:
            raise ConfigError(
                f"max-supersteps must be >= 1, got {self.max_supersteps}")
        if self.source < 0:
            raise ConfigError(f"source must be >= 0, got {self.source}")


@dataclass
class BenchmarkRecord:
    """One measured configuration; serialises 1:1 into a JSONL row."""

    variant: str
    algorithm: str
    graph: str
    vertex_count: int
    edge_count: int
    workers: int
    layout: str
    combiner: str
    scheduler: str
    chunk_size: int
    repeats: int
    wall_seconds: list[float]
    median_seconds: float
    superstep_count: int
    messages_total: int
    supersteps: list[dict]
    load_seconds: float
    graph_from_cache: bool
    hit_superstep_cap: bool
    speedup_vs_baseline: float | None = None
    validated: bool | None = None
    timestamp: float = field(default_factory=time.time)

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), sort_keys=True)


# ======================================================================
# Graph loading with a binary CSR cache
# ======================================================================

def load_graph_cached(path: str, *, undirected: bool = False,
                      cache_dir: str | None = None) -> tuple[Graph, float, bool]:
    """Load an edge list, round-tripping through the binary cache when set.

    The cache key covers the absolute path, file size, mtime and the
    ``undirected`` flag, so a changed input never serves a stale graph.
    Returns ``(graph, load_seconds, served_from_cache)``.
    """
    t0 = time.perf_counter()
    if not cache_dir:
        g = load_edge_list(path, undirected=undirected)
        return g, time.perf_counter() - t0, False

    st = os.stat(path)
    tag = hashlib.sha256(
        f"{os.path.abspath(path)}|{st.st_size}|{st.st_mtime_ns}|"
        f"{int(undirected)}".encode()).hexdigest()[:16]
    stem = os.path.splitext(os.path.basename(path))[0]
    cache_path = os.path.join(cache_dir, f"{stem}-{tag}.csr")
    if os.path.exists(cache_path):
        try:
            g = load_cache(cache_path)
            g.source_path = path
            logger.info("graph cache hit: %s", cache_path)
            return g, time.perf_counter() - t0, True
        except GraphLoadError as e:
            logger.warning("ignoring unusable graph cache %s (%s)",
                           cache_path, e)
    g = load_edge_list(path, undirected=undirected)
    os.makedirs(cache_dir, exist_ok=True)
    save_cache(g, cache_path)
    logger.info("graph cache written: %s", cache_path)
    return g, time.perf_counter() - t0, False


# ======================================================================
# Single configured run
# ======================================================================

def build_program(cfg: HarnessConfig) -> VertexProgram:
    if cfg.algorithm == "pagerank":
        return pagerank(cfg.iterations, cfg.damping)
    if cfg.algorithm == "components":
        return connected_components()
    return sssp(cfg.source)


def build_engine_config(cfg: HarnessConfig) -> EngineConfig:
    kind = SchedulerKind(cfg.scheduler)
    if kind is SchedulerKind.DYNAMIC:
        mode = SchedulerMode.dynamic(cfg.chunk_size)
    elif kind is SchedulerKind.EDGE_BALANCED:
        mode = SchedulerMode.edge_balanced()
    else:
        mode = SchedulerMode.static()
    return EngineConfig(workers=cfg.workers, scheduler=mode,
                        layout=LayoutMode(cfg.layout),
                        combiner=CombinerKind(cfg.combiner),
                        max_supersteps=cfg.max_supersteps)


def run_single(cfg: HarnessConfig, graph: Graph,
               load_seconds: float = 0.0, from_cache: bool = False,
               variant: str = "single") -> tuple[BenchmarkRecord, RunReport]:
    """Run one configuration ``cfg.repeats`` times; report the median."""
    program = build_program(cfg)
    engine_cfg = build_engine_config(cfg)
    walls: list[float] = []
    report: RunReport | None = None
    for i in range(cfg.repeats):
        report = run(graph, program, engine_cfg)
        walls.append(report.wall_seconds)
        logger.info("%s/%s repeat %d/%d: %.4fs, %d supersteps",
                    cfg.algorithm, variant, i + 1, cfg.repeats,
                    report.wall_seconds, report.superstep_count)

    validated: bool | None = None
    if cfg.validate:
        check_against_reference(graph, cfg, report.values)
        validated = True

    record = BenchmarkRecord(
        variant=variant, algorithm=cfg.algorithm, graph=cfg.graph,
        vertex_count=graph.vertex_count, edge_count=graph.edge_count,
        workers=cfg.workers, layout=cfg.layout, combiner=cfg.combiner,
        scheduler=cfg.scheduler, chunk_size=cfg.chunk_size,
        repeats=cfg.repeats, wall_seconds=[round(w, 6) for w in walls],
        median_seconds=round(statistics.median(walls), 6),
        superstep_count=report.superstep_count,
        messages_total=sum(s.messages_sent for s in report.supersteps),
        supersteps=[{"index": s.index, "active": s.active_count,
                     "messages": s.messages_sent,
                     "seconds": round(s.seconds, 6)}
                    for s in report.supersteps],
        load_seconds=round(load_seconds, 6), graph_from_cache=from_cache,
        hit_superstep_cap=report.hit_superstep_cap, validated=validated)
    return record, report


def stored_edge_arrays(graph: Graph) -> tuple[np.ndarray, np.ndarray]:
    """The graph's directed edge list exactly as stored (CSR order)."""
    src = np.repeat(np.arange(graph.vertex_count, dtype=np.int64),
                    graph.out_degrees)
    return src, graph.out_targets.astype(np.int64)


def check_against_reference(graph: Graph, cfg: HarnessConfig,
                            values: np.ndarray) -> None:
    """Compare engine output against the matching reference implementation."""
    src, dst = stored_edge_arrays(graph)
    n = graph.vertex_count
    if cfg.algorithm == "pagerank":
        ref = pagerank_reference(src, dst, n, cfg.iterations, cfg.damping)
        err = float(np.max(np.abs(values - ref))) if n else 0.0
        if err > 1e-9:
            raise ValidationError(
                f"pagerank deviates from the power-iteration reference by "
                f"{err:.3e} (limit 1e-9)")
    elif cfg.algorithm == "components":
        ref = components_reference(src, dst, n)
        bad = int((values != ref).sum())
        if bad:
            raise ValidationError(
                f"component labels differ from union-find reference on "
                f"{bad} of {n} vertices")
    else:
        ref = bfs_distances_reference(src, dst, n, cfg.source)
        bad = int((values != ref).sum())
        if bad:
            raise ValidationError(
                f"sssp distances differ from BFS reference on "
                f"{bad} of {n} vertices")
    logger.info("%s validated against reference", cfg.algorithm)


# ======================================================================
# A/B grid
# ======================================================================

def grid_variants(algorithm: str) -> list[tuple[str, dict]]:
    """The fixed comparison family: baseline, one toggle each, combined.

    Push-mode algorithms get a combiner row; pull-mode ones don't, since
    broadcasts are contention-free and the combiner strategy never runs.
    """
    base = {"layout": "interleaved", "scheduler": "static",
            "combiner": "lock"}
    push = algorithm == "sssp"
    rows: list[tuple[str, dict]] = [("baseline", dict(base))]
    if push:
        rows.append(("hybrid", dict(base, combiner="hybrid")))
    rows.append(("externalised", dict(base, layout="externalised")))
    rows.append(("edge-balanced", dict(base, scheduler="edge-balanced")))
    rows.append(("dynamic", dict(base, scheduler="dynamic")))
    final = dict(base, layout="externalised", scheduler="dynamic")
    if push:
        final["combiner"] = "hybrid"
    rows.append(("final", final))
    return rows


def run_grid(cfg: HarnessConfig, graph: Graph, load_seconds: float = 0.0,
             from_cache: bool = False) -> tuple[list[BenchmarkRecord], RunReport]:
    records: list[BenchmarkRecord] = []
    last_report: RunReport | None = None
    baseline_median: float | None = None
    for name, overrides in grid_variants(cfg.algorithm):
        row_cfg = dataclasses.replace(cfg, **overrides)
        record, report = run_single(row_cfg, graph, load_seconds, from_cache,
                                    variant=name)
        if name == "baseline":
            baseline_median = record.median_seconds
        if baseline_median and record.median_seconds > 0:
            record.speedup_vs_baseline = round(
                baseline_median / record.median_seconds, 4)
        records.append(record)
        last_report = report
    return records, last_report


# ======================================================================
# Report emission
# ======================================================================

def format_table(records: list[BenchmarkRecord]) -> str:
    head = ("variant", "layout", "combiner", "scheduler", "workers",
            "supersteps", "messages", "median_s", "speedup")
    rows = [head]
    for r in records:
        rows.append((r.variant, r.layout, r.combiner, r.scheduler,
                     str(r.workers), str(r.superstep_count),
                     str(r.messages_total), f"{r.median_seconds:.4f}",
                     f"{r.speedup_vs_baseline:.2f}x"
                     if r.speedup_vs_baseline else "-"))
    widths = [max(len(row[c]) for row in rows) for c in range(len(head))]
    lines = []
    for i, row in enumerate(rows):
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip())
        if i == 0:
            lines.append("  ".join("-" * w for w in widths))
    return "\n".join(lines)


def write_records(records: list[BenchmarkRecord], path: str) -> None:
    """Append one JSON object per record (JSONL)."""
    with open(path, "a", encoding="utf-8") as fh:
        for r in records:
            fh.write(r.to_json() + "\n")


def write_results(graph: Graph, values: np.ndarray, path: str) -> None:
    """Dump final per-vertex values as ``vertex<TAB>value``, original ids."""
    ids = (graph.id_map if graph.id_map is not None
           else np.arange(graph.vertex_count, dtype=np.int64))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# vertex\tvalue\n")
        if np.issubdtype(values.dtype, np.floating):
            for i, val in zip(ids.tolist(), values.tolist()):
                fh.write(f"{i}\t{val:.12g}\n")
        else:
            for i, val in zip(ids.tolist(), values.tolist()):
                fh.write(f"{i}\t{val}\n")
