"""Command-line runner.

Loads an edge-list graph, executes one configured run (or the fixed A/B
grid with ``--grid``), prints a result table, and optionally appends JSONL
benchmark records and a per-vertex result dump.

Exit codes: 0 success, 2 bad configuration, 3 graph load failure,
4 validation failure, 5 a run hit the superstep cap.
"""

from __future__ import annotations

import argparse
import logging
import sys

from .errors import ConfigError, GraphLoadError, ValidationError
from .harness import (ALGORITHMS, CACHE_DIR_ENV, COMBINERS, LAYOUTS,
                      SCHEDULERS, HarnessConfig, format_table,
                      load_graph_cached, run_grid, run_single, write_records,
                      write_results)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_LOAD = 3
EXIT_VALIDATION = 4
EXIT_SUPERSTEP_CAP = 5

logger = logging.getLogger("pregelite.cli")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="pregelite",
        description="Run a vertex-centric graph algorithm over an edge-list "
                    "file and report timings.")
    p.add_argument("--graph", required=True,
                   help="path to a whitespace edge-list file ('#' comments)")
    p.add_argument("--algorithm", required=True, choices=ALGORITHMS)
    p.add_argument("--undirected", action="store_true",
                   help="store each input edge in both directions")
    p.add_argument("--workers", type=int, default=1,
                   help="worker thread count (default 1)")
    p.add_argument("--layout", choices=LAYOUTS, default="interleaved",
                   help="vertex attribute storage layout")
    p.add_argument("--combiner", choices=COMBINERS, default="hybrid",
                   help="push-mode message combiner strategy")
    p.add_argument("--scheduler", choices=SCHEDULERS, default="static",
                   help="work distribution policy")
    p.add_argument("--chunk-size", type=int, default=256,
                   help="chunk size for the dynamic scheduler (default 256)")
    p.add_argument("--iterations", type=int, default=10,
                   help="pagerank power-iteration count (default 10)")
    p.add_argument("--damping", type=float, default=0.85,
                   help="pagerank damping factor (default 0.85)")
    p.add_argument("--source", type=int, default=0,
                   help="sssp source as a dense vertex index, i.e. position "
                        "in first-appearance order (default 0)")
    p.add_argument("--repeats", type=int, default=3,
                   help="timed repeats per configuration; the table shows "
                        "the median (default 3)")
    p.add_argument("--max-supersteps", type=int, default=10_000)
    p.add_argument("--validate", action="store_true",
                   help="compare results against the reference "
                        "implementation after the run")
    p.add_argument("--grid", action="store_true",
                   help="run the fixed optimisation A/B grid instead of a "
                        "single configuration")
    p.add_argument("--records-out", metavar="PATH",
                   help="append one JSON record per run to this JSONL file")
    p.add_argument("--results-out", metavar="PATH",
                   help="write final vertex values (original ids, TSV)")
    p.add_argument("--cache-dir", default=None, metavar="DIR",
                   help="binary CSR cache directory (default: "
                        f"${CACHE_DIR_ENV} if set)")
    p.add_argument("-v", "--verbose", action="store_true",
                   help="log per-repeat progress")
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s")

    kwargs = {k: v for k, v in vars(args).items() if k != "verbose"}
    if kwargs.get("cache_dir") is None:
        kwargs.pop("cache_dir")  # fall back to the environment default
    cfg = HarnessConfig(**kwargs)
    try:
        cfg.check()
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG

    try:
        graph, load_seconds, from_cache = load_graph_cached(
            cfg.graph, undirected=cfg.undirected, cache_dir=cfg.cache_dir)
    except GraphLoadError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_LOAD
    logger.info("loaded %s: %d vertices, %d directed edges (%.3fs%s)",
                cfg.graph, graph.vertex_count, graph.edge_count,
                load_seconds, ", cached" if from_cache else "")

    try:
        if cfg.grid:
            records, report = run_grid(cfg, graph, load_seconds, from_cache)
        else:
            record, report = run_single(cfg, graph, load_seconds, from_cache)
            records = [record]
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except ValidationError as e:
        print(f"validation failed: {e}", file=sys.stderr)
        return EXIT_VALIDATION

    print(f"graph={cfg.graph} vertices={graph.vertex_count} "
          f"edges={graph.edge_count} algorithm={cfg.algorithm} "
          f"workers={cfg.workers}")
    print(format_table(records))
    if cfg.records_out:
        write_records(records, cfg.records_out)
        logger.info("records appended to %s", cfg.records_out)
    if cfg.results_out:
        write_results(graph, report.values, cfg.results_out)
        logger.info("results written to %s", cfg.results_out)

    if any(r.hit_superstep_cap for r in records):
        print("warning: superstep cap reached before quiescence",
              file=sys.stderr)
        return EXIT_SUPERSTEP_CAP
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
