"""Asynchronous KT1 CONGEST simulator and sublinear-communication MST stack.

Layout:
    graphs      weighted graph model, generators, unique-weight transform
    oracles     sequential reference algorithms used for verification
    sim         deterministic discrete-event message-passing kernel
    sketch      XOR edge sketches and the shared counter-based PRF
    fragments   leader-coordinated fragment primitives (sample / count / wait)
    forest      star initialization and the maximal-tree forest protocol
    fmin        minimum spanning forest of the dense core, two-part protocol
    bfs         gated layered BFS over the sparse spanner
    ghs         rank-based asynchronous MST used as the final stage
    pipeline    role assignment, stage gating, end-to-end runs
    harness     run records, sweeps, verification, report rendering
"""

from asyncmst.config import RunConfig
from asyncmst.graphs import WeightedGraph, generate_graph, make_weights_unique

__all__ = [
    "RunConfig",
    "WeightedGraph",
    "generate_graph",
    "make_weights_unique",
]
