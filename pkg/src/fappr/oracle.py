"""Reference computations used to check the Monte Carlo engine.

Walk semantics match the engine exactly: a walk takes at least one step
before its first termination coin, a walk sitting at a sink jumps back to its
source and steps on from there within the same step, and a source that is
itself a sink keeps all of its mass.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graph import WeightedGraph

MAX_NODES = 100_000
MAX_PATHS = 10_000_000
DEFAULT_TOL = 1e-9


class OracleTooLarge(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class ExactPpr:
    """Dense PPR rows; ``matrix[s, t]`` is the probability a walk from ``s`` ends at ``t``."""

    matrix: np.ndarray
    alpha: float
    iterations: int
    tol: float

    def __getitem__(self, key):
        return self.matrix[key]

    def row(self, s: int) -> np.ndarray:
        return self.matrix[s]


def exact_ppr(
    g: WeightedGraph,
    alpha: float,
    tol: float = DEFAULT_TOL,
    sources=None,
    batch: int = 512,
) -> ExactPpr:
    """Truncated power series ``sum_k alpha (1-alpha)^(k-1) x_k`` per source.

    ``x_k`` is the position distribution after ``k`` steps. Mass parked on a
    sink is re-emitted along the source's own out-edges on the next step.
    The series stops once the untouched tail ``(1-alpha)^K`` drops below
    ``tol``. Rows of ``sources`` (all nodes by default) are returned.
    """
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if g.n > MAX_NODES:
        raise OracleTooLarge(f"exact PPR refuses graphs with more than {MAX_NODES} nodes (got {g.n})")
    if not 0 < tol < 1:
        raise ValueError("tol must lie in (0, 1)")
    n = g.n
    sources = np.arange(n) if sources is None else np.asarray(sources, dtype=np.int64)
    steps = max(1, math.ceil(math.log(tol) / math.log(1.0 - alpha)))
    P = g.transition_matrix()
    PT = P.T.tocsr()
    sink_mask = g.out_degree == 0
    out = np.zeros((len(sources), n))

    for lo in range(0, len(sources), batch):
        src = sources[lo:lo + batch]
        first = P[src].toarray()
        x = first.copy()
        acc = np.zeros_like(x)
        coef = alpha
        for _ in range(steps):
            acc += coef * x
            parked = x[:, sink_mask].sum(axis=1) if sink_mask.any() else None
            x = (PT @ x.T).T
            if parked is not None:
                x += parked[:, None] * first
            coef *= 1.0 - alpha
        # assign the remaining (1-alpha)^K to the next position distribution so rows stay stochastic
        acc += (coef / alpha) * x
        out[lo:lo + len(src)] = acc

    for row, s in enumerate(sources):
        if sink_mask[s]:
            out[row] = 0.0
            out[row, s] = 1.0
    return ExactPpr(out, alpha, steps, tol)


def enumerate_walks(g: WeightedGraph, s: int, depth: int, alpha: float) -> dict[tuple[int, int], float]:
    """Exact masses by explicit path enumeration up to ``depth`` steps.

    Key ``(t, 0)``: the walk stopped at ``t`` within ``depth`` steps.
    Key ``(t, 1)``: the walk is still running at ``t`` after ``depth`` steps,
    or reached sink ``t`` earlier and survived its coin there.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if g.out_degree[s] == 0:
        raise ValueError(f"source {s} is a sink")
    deg = g.out_degree
    budget = [MAX_PATHS]
    out: dict[tuple[int, int], float] = {}

    def add(key, p):
        out[key] = out.get(key, 0.0) + p

    def visit(u: int, q: float, step: int) -> None:
        budget[0] -= 1
        if budget[0] < 0:
            raise OracleTooLarge(f"more than {MAX_PATHS} paths to enumerate")
        add((u, 0), alpha * q)
        if step == depth or deg[u] == 0:
            add((u, 1), (1.0 - alpha) * q)
            return
        for t, r in zip(g.neighbors(u).tolist(), g.routing(u).tolist()):
            visit(t, q * (1.0 - alpha) * r, step + 1)

    for t, r in zip(g.neighbors(s).tolist(), g.routing(s).tolist()):
        visit(t, r, 1)
    return out
