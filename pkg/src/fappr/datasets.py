"""Small built-in graphs for examples, tests and benchmarks."""
from __future__ import annotations

import numpy as np

from .graph import WeightedGraph, from_edges

# 8 nodes, 12 weighted edges. Node 0 has six out-edges with routing
# probabilities 0.1, 0.15, 0.15, 0.2, 0.2, 0.2; nodes 2 -> 3 <-> 4 form the
# chain used by the big-move walkthrough; node 7 is a sink.
TOY_EDGES = (
    (0, 1, 2.0),
    (0, 2, 3.0),
    (0, 3, 3.0),
    (0, 4, 4.0),
    (0, 5, 4.0),
    (0, 6, 4.0),
    (1, 0, 1.0),
    (2, 3, 1.0),
    (3, 4, 1.0),
    (4, 3, 1.0),
    (5, 7, 1.0),
    (6, 7, 1.0),
)


def toy_graph() -> WeightedGraph:
    return from_edges(TOY_EDGES, n=8, labels=[f"v{i}" for i in range(8)])


def toy_edge_list() -> str:
    return "".join(f"v{u}\tv{v}\t{w:g}\n" for u, v, w in TOY_EDGES)


def power_law_graph(n: int, exponent: float = 2.0, seed: int = 0, allow_sinks: bool = False) -> WeightedGraph:
    """Random directed graph with Zipf-distributed out-degrees.

    Targets are drawn uniformly; edge ``u -> v`` gets weight ``1 + rank of v``
    among ``u``'s neighbours. Every node has at least one out-edge unless
    ``allow_sinks`` is set, in which case degree-0 draws are kept.
    """
    rng = np.random.default_rng(seed)
    deg = np.minimum(rng.zipf(exponent, size=n), n - 1)
    if allow_sinks:
        deg = np.where(rng.random(n) < 0.05, 0, deg)
    edges = []
    for u in range(n):
        if deg[u] == 0:
            continue
        targets = rng.choice(n - 1, size=deg[u], replace=False)
        targets[targets >= u] += 1  # no self-loops
        for rank, v in enumerate(np.sort(targets).tolist()):
            edges.append((u, v, 1.0 + rank))
    return from_edges(edges, n=n)
