"""Precomputed multi-step moves for low out-degree nodes.

A big move ``(target, mark, p)`` stands for every walk prefix leaving ``v``
that either stopped at ``target`` (mark 0) or is still running there
(mark 1). The moves of a node form a complete distribution, so one alias
draw replaces several single-step extensions.

Frontier walks that reach a sink are frozen as running moves at that sink:
their continuation depends on the walk's head, which is unknown here, so the
engine applies the restart rule after the jump.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

import numpy as np

from .alias import AliasTable, build_alias
from .graph import WeightedGraph

TERMINATED = 0
ACTIVE = 1


class BigMove(NamedTuple):
    target: int
    mark: int
    p: float


@dataclass(frozen=True, eq=False)
class BigMoveTable:
    moves: dict[int, tuple[BigMove, ...]]
    tables: dict[int, AliasTable]
    # expansion iterations run per node; walks in BM(v) have length <= iterations + 1
    iterations: dict[int, int] = field(default_factory=dict)
    alpha: float = 0.5
    d: int = 0

    def __contains__(self, v: int) -> bool:
        return v in self.moves

    def __len__(self) -> int:
        return len(self.moves)

    def depth(self, v: int) -> int:
        return self.iterations[v] + 1


def _expand(g: WeightedGraph, v: int, d: int, alpha: float, aggregate: bool):
    frontier: list[tuple[int, float]] = list(zip(g.neighbors(v).tolist(), g.routing(v).tolist()))
    stopped: dict[int, float] = {}
    for u, p in frontier:
        stopped[u] = stopped.get(u, 0.0) + p
    frozen: dict[int, float] = {}
    prev_b = 0
    iterations = 0
    out_deg = g.out_degree
    while len(stopped) + len(frontier) + len(frozen) < d and prev_b < len(stopped):
        prev_b = len(stopped)
        nxt: dict[int, float] | list = {} if aggregate else []
        for u, p in frontier:
            if out_deg[u] == 0:
                frozen[u] = frozen.get(u, 0.0) + p
                continue
            scale = p * (1.0 - alpha)
            for t, r in zip(g.neighbors(u).tolist(), g.routing(u).tolist()):
                if aggregate:
                    nxt[t] = nxt.get(t, 0.0) + scale * r
                else:
                    nxt.append((t, scale * r))
        new_frontier = list(nxt.items()) if aggregate else nxt
        for t, p in new_frontier:
            stopped[t] = stopped.get(t, 0.0) + p
        frontier = new_frontier
        iterations += 1

    running: dict[int, float] = dict(frozen)
    for u, p in frontier:
        running[u] = running.get(u, 0.0) + p
    moves = [BigMove(t, TERMINATED, p * alpha) for t, p in stopped.items()]
    moves += [BigMove(t, ACTIVE, p * (1.0 - alpha)) for t, p in running.items()]
    return tuple(m for m in moves if m.p > 0), iterations


def precompute_big_moves(
    g: WeightedGraph,
    small_nodes: Iterable[int],
    d: int,
    alpha: float,
    aggregate_frontier: bool = True,
) -> BigMoveTable:
    """Expand each small node's walk distribution until it has about ``d`` entries.

    Expansion for ``v`` stops once the stopped and running entry counts reach
    ``d`` or an iteration adds no new stopped target. With
    ``aggregate_frontier`` the running frontier is merged by target before
    counting; otherwise every path extension counts separately.
    """
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if d < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    moves: dict[int, tuple[BigMove, ...]] = {}
    tables: dict[int, AliasTable] = {}
    iterations: dict[int, int] = {}
    deg = g.out_degree
    for v in sorted(set(int(x) for x in small_nodes)):
        if deg[v] == 0:
            raise ValueError(f"node {v} is a sink and cannot have big moves")
        bm, k = _expand(g, v, d, alpha, aggregate_frontier)
        total = sum(m.p for m in bm)
        moves[v] = bm
        tables[v] = build_alias([(i, m.p / total) for i, m in enumerate(bm)])
        iterations[v] = k
    return BigMoveTable(moves, tables, iterations, alpha, d)


def sample_big_move(table: BigMoveTable, v: int, rng) -> BigMove:
    try:
        alias = table.tables[v]
    except KeyError:
        raise KeyError(f"node {v} has no big moves") from None
    return table.moves[v][alias.elements[alias.sample_index(rng)]]


def to_dict(moves: Iterable[BigMove]) -> dict[tuple[int, int], float]:
    out: dict[tuple[int, int], float] = {}
    for m in moves:
        out[(m.target, m.mark)] = out.get((m.target, m.mark), 0.0) + m.p
    return out


def pack(table: BigMoveTable, n: int):
    """Flatten into CSR-style arrays for vectorized sampling.

    Returns ``(indptr, target, mark, prob, alias)`` where ``alias`` holds
    positions local to each node's slice.
    """
    counts = np.zeros(n, dtype=np.int64)
    for v, bm in table.moves.items():
        counts[v] = len(bm)
    indptr = np.concatenate([[0], np.cumsum(counts)])
    total = int(indptr[-1])
    target = np.empty(total, dtype=np.int64)
    mark = np.empty(total, dtype=np.int8)
    prob = np.empty(total, dtype=np.float64)
    alias = np.empty(total, dtype=np.int64)
    for v, bm in table.moves.items():
        lo, hi = indptr[v], indptr[v + 1]
        target[lo:hi] = [m.target for m in bm]
        mark[lo:hi] = [m.mark for m in bm]
        prob[lo:hi] = table.tables[v].prob
        alias[lo:hi] = table.tables[v].alias
    return indptr, target, mark, prob, alias
