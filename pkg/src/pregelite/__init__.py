"""Shared-memory vertex-centric graph processing.

A small Pregel-style framework: vertex programs exchange combined messages
through per-vertex slots across barrier-synchronised supersteps, with
independently toggleable storage layout, message-combiner strategy, and
work scheduling so the cost of each choice can be measured in isolation.
"""

from .algorithms import (DEFAULT_DAMPING, DEFAULT_ITERATIONS, UNREACHED,
                         connected_components, pagerank, sssp)
from .engine import (DEFAULT_MAX_SUPERSTEPS, CommMode, EngineConfig,
                     RunReport, SuperstepStats, VertexContext, VertexProgram,
                     run)
from .errors import (ConfigError, ExecutionError, GraphLoadError, PhaseError,
                     PregeliteError, ValidationError)
from .graph import (DegreeStats, Graph, degree_prefix_sums, densify_ids,
                    from_edges, gather_adjacency, load_cache, load_edge_list,
                    save_cache)
from .layout import LayoutMode, VertexStore, cold_dtype, hot_dtype
from .mailbox import (CombineFn, CombinerKind, Mailbox, MessageBuffer,
                      apply_cas, min_combine, send_cas, send_hybrid,
                      send_lock, sender_for, sum_combine)
from .scheduler import (DEFAULT_CHUNK_SIZE, ChunkClaimer, SchedulerKind,
                        SchedulerMode, WorkPartition, dynamic_chunks,
                        edge_balanced_partition, static_partition)

__version__ = "0.1.0"
