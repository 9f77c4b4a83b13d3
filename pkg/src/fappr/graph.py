"""Directed edge-weighted graphs stored as CSR arrays."""
from __future__ import annotations

import io
import math
from dataclasses import dataclass, field
from typing import IO, Iterable, Sequence

import numpy as np

WEIGHTINGS = ("given", "uniform", "linear")


class GraphFormatError(ValueError):
    """Raised for malformed edge-list input."""


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    """Immutable directed graph with positive edge weights.

    Out-neighbours of node ``u`` are ``indices[indptr[u]:indptr[u + 1]]``,
    sorted by target id, with weights in the matching slice of ``weights``.
    ``labels[i]`` is the original identifier of internal node ``i``.
    """

    indptr: np.ndarray
    indices: np.ndarray
    weights: np.ndarray
    labels: tuple[str, ...]
    total_out_weight: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        src = np.repeat(np.arange(len(self.indptr) - 1), np.diff(self.indptr))
        total = np.bincount(src, weights=self.weights, minlength=len(self.indptr) - 1)
        for arr in (self.indptr, self.indices, self.weights, total):
            arr.setflags(write=False)
        object.__setattr__(self, "total_out_weight", total)

    @property
    def n(self) -> int:
        return len(self.indptr) - 1

    @property
    def n_edges(self) -> int:
        return len(self.indices)

    @property
    def out_degree(self) -> np.ndarray:
        return np.diff(self.indptr)

    def neighbors(self, u: int) -> np.ndarray:
        return self.indices[self.indptr[u]:self.indptr[u + 1]]

    def edge_weights(self, u: int) -> np.ndarray:
        return self.weights[self.indptr[u]:self.indptr[u + 1]]

    def routing(self, u: int) -> np.ndarray:
        """Routing probabilities over ``neighbors(u)``; empty for a sink."""
        w = self.edge_weights(u)
        if w.size == 0:
            return w.astype(np.float64)
        return w / self.total_out_weight[u]

    def routing_probabilities(self) -> np.ndarray:
        """Routing probability of every stored edge, aligned with ``indices``."""
        src = np.repeat(np.arange(self.n), self.out_degree)
        return self.weights / self.total_out_weight[src]

    def transition_matrix(self):
        import scipy.sparse as sp

        return sp.csr_matrix(
            (self.routing_probabilities(), self.indices, self.indptr), shape=(self.n, self.n)
        )

    def write_id_map(self, fh: IO[str]) -> None:
        for i, label in enumerate(self.labels):
            fh.write(f"{i}\t{label}\n")


@dataclass(frozen=True)
class DegreeStats:
    d_avg: float
    d_max: int
    small_nodes: frozenset[int]
    large_nodes: frozenset[int]


def from_edges(
    edges: Iterable[tuple[int, int, float]] | Iterable[tuple[int, int]],
    n: int | None = None,
    labels: Sequence[str] | None = None,
) -> WeightedGraph:
    """Build a graph from ``(src, dst[, weight])`` triples over dense ids.

    Duplicate edges are merged by summing their weights.
    """
    acc: dict[tuple[int, int], float] = {}
    max_id = -1
    for edge in edges:
        if len(edge) == 2:
            u, v = edge
            w = 1.0
        else:
            u, v, w = edge
        u, v, w = int(u), int(v), float(w)
        if u < 0 or v < 0:
            raise ValueError(f"negative node id in edge ({u}, {v})")
        if not w > 0 or math.isinf(w):
            raise ValueError(f"edge ({u}, {v}) has non-positive or infinite weight {w}")
        acc[(u, v)] = acc.get((u, v), 0.0) + w
        max_id = max(max_id, u, v)
    if n is None:
        n = max_id + 1
    elif max_id >= n:
        raise ValueError(f"node id {max_id} out of range for n={n}")
    if labels is None:
        labels = [str(i) for i in range(n)]
    if len(labels) != n:
        raise ValueError("labels must have one entry per node")
    return _csr(n, acc, tuple(labels))


def _csr(n: int, acc: dict[tuple[int, int], float], labels: tuple[str, ...]) -> WeightedGraph:
    if acc:
        keys = np.array(sorted(acc), dtype=np.int64)
        src, dst = keys[:, 0], keys[:, 1]
        w = np.array([acc[(int(u), int(v))] for u, v in keys], dtype=np.float64)
    else:
        src = dst = np.zeros(0, dtype=np.int64)
        w = np.zeros(0, dtype=np.float64)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, src + 1, 1)
    indptr = np.cumsum(indptr)
    return WeightedGraph(indptr=indptr, indices=dst, weights=w, labels=labels)


def _densify(raw: list[str]) -> dict[str, int]:
    uniq = set(raw)
    try:
        order = sorted(uniq, key=int)
    except ValueError:
        order = sorted(uniq)
    return {label: i for i, label in enumerate(order)}


def load_edge_list(source, weighting: str = "given") -> WeightedGraph:
    """Parse a whitespace-separated edge list.

    ``source`` may be a path, a text/binary file object, or ``bytes``.
    Lines starting with ``#`` and blank lines are skipped. Node labels are
    densified to ``0..n-1`` (numeric order when every label is an integer,
    lexicographic otherwise).

    ``weighting`` selects how edge weights are assigned:

    - ``given``: third column, required on every line
    - ``uniform``: every line contributes weight 1 (duplicates therefore sum)
    - ``linear``: edge ``u -> v`` gets ``1 + rank of v`` among ``u``'s
      distinct out-neighbours ordered by internal id
    """
    if weighting not in WEIGHTINGS:
        raise ValueError(f"unknown weighting {weighting!r}; expected one of {WEIGHTINGS}")
    text = _read_text(source)

    rows: list[tuple[str, str, float | None]] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = stripped.split()
        if len(parts) not in (2, 3):
            raise GraphFormatError(f"line {lineno}: expected 2 or 3 fields, got {len(parts)}")
        w = None
        if len(parts) == 3:
            try:
                w = float(parts[2])
            except ValueError:
                raise GraphFormatError(f"line {lineno}: weight {parts[2]!r} is not a number") from None
            if not w > 0 or math.isinf(w):
                raise ValueError(f"line {lineno}: weight must be a positive finite number, got {parts[2]}")
        elif weighting == "given":
            raise ValueError(f"line {lineno}: weighting='given' requires a weight column")
        rows.append((parts[0], parts[1], w))

    ids = _densify([r[0] for r in rows] + [r[1] for r in rows])
    labels = tuple(sorted(ids, key=ids.__getitem__))
    acc: dict[tuple[int, int], float] = {}
    for u_label, v_label, w in rows:
        key = (ids[u_label], ids[v_label])
        if weighting == "given":
            acc[key] = acc.get(key, 0.0) + w
        elif weighting == "uniform":
            acc[key] = acc.get(key, 0.0) + 1.0
        else:
            acc[key] = 0.0
    if weighting == "linear":
        rank = 0
        prev_u = None
        for u, v in sorted(acc):
            rank = rank + 1 if u == prev_u else 0
            prev_u = u
            acc[(u, v)] = 1.0 + rank
    return _csr(len(labels), acc, labels)


def _read_text(source) -> str:
    if isinstance(source, (bytes, bytearray)):
        return bytes(source).decode("utf-8")
    if isinstance(source, str) or hasattr(source, "__fspath__"):
        with open(source, "rb") as fh:
            return fh.read().decode("utf-8")
    data = source.read()
    if isinstance(data, bytes):
        return data.decode("utf-8")
    return data


def routing_probability(g: WeightedGraph, s: int, t: int) -> float:
    nbrs = g.neighbors(s)
    pos = int(np.searchsorted(nbrs, t))
    if pos >= len(nbrs) or nbrs[pos] != t:
        raise KeyError(f"no edge {s} -> {t}")
    return float(g.edge_weights(s)[pos] / g.total_out_weight[s])


def degree_stats(g: WeightedGraph) -> DegreeStats:
    return classify_degrees(g.out_degree)


def classify_degrees(deg) -> DegreeStats:
    """Small nodes have out-degree below the mean, large ones above ``sqrt(d_max)``."""
    deg = np.asarray(deg)
    if deg.size == 0:
        return DegreeStats(0.0, 0, frozenset(), frozenset())
    d_avg = float(deg.sum()) / deg.size
    d_max = int(deg.max())
    small = frozenset(np.flatnonzero(deg < d_avg).tolist())
    large = frozenset(np.flatnonzero(deg > math.sqrt(d_max)).tolist())
    return DegreeStats(d_avg, d_max, small, large)


def sinks(g: WeightedGraph) -> frozenset[int]:
    return frozenset(np.flatnonzero(g.out_degree == 0).tolist())


def to_edge_list(g: WeightedGraph) -> str:
    buf = io.StringIO()
    for u in range(g.n):
        for v, w in zip(g.neighbors(u), g.edge_weights(u)):
            buf.write(f"{g.labels[u]}\t{g.labels[v]}\t{float(w)!r}\n")
    return buf.getvalue()
