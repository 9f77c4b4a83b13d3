"""Pipelined Monte Carlo driver.

Walks are kept only as ``(head, tail)`` plus bookkeeping for their random
streams. Each loop iteration is one bulk-synchronous round: a new pipeline of
up to ``gamma`` walks per node is seeded while budget remains, every active
walk is extended by one sampling event, and walks that stopped are counted.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, IO, Iterator, NamedTuple

import numpy as np

from . import bigmove as bm
from .alias import DEFAULT_BLOCK_SIZE, AliasTable, AliasTree, _build_tables, build_alias_tree
from .estimate import EstimateStore
from .graph import WeightedGraph, degree_stats
from .rng import SLOT_COIN, stream_keys, uniforms

log = logging.getLogger(__name__)

WALK_RECORD_BYTES = 16  # head and tail as int64; the terminated bit is implied by the collection
DEFAULT_MEMORY = 256 * 1024 * 1024
DEFAULT_BIGMOVE_D = 16
DEFAULT_C_OMEGA = 3.0
MEMORY_SLACK = 1.10

SINK, FLAT, TREE, BIG = 0, 1, 2, 3


def _check_open_unit(name: str, value: float) -> None:
    if not 0 < value < 1:
        raise ValueError(f"{name} must lie in (0, 1), got {value}")


def compute_omega(eps: float, delta: float, p_f: float, c_omega: float = DEFAULT_C_OMEGA) -> int:
    """Walks per source: ``ceil(c_omega * ln(1/p_f) / (eps^2 * delta))``."""
    if eps <= 0 or eps > 1:
        raise ValueError(f"eps must lie in (0, 1], got {eps}")
    if delta <= 0 or delta > 1:
        raise ValueError(f"delta must lie in (0, 1], got {delta}")
    if p_f <= 0 or p_f >= 1:
        raise ValueError(f"p_f must lie in (0, 1), got {p_f}")
    if c_omega <= 0:
        raise ValueError("c_omega must be positive")
    return max(1, math.ceil(c_omega * math.log(1.0 / p_f) / (eps * eps * delta)))


def autotune_gamma(n: int, alpha: float, memory: float, walk_bytes: int = WALK_RECORD_BYTES, omega: int | None = None) -> int:
    """Largest pipeline width whose steady-state walk count ``n*gamma/alpha`` fits in ``memory``."""
    if n < 1 or walk_bytes < 1 or memory <= 0:
        raise ValueError("autotune_gamma needs n >= 1, walk_bytes >= 1 and memory > 0")
    _check_open_unit("alpha", alpha)
    gamma = max(1, math.floor(alpha * memory / (n * walk_bytes)))
    if omega is not None:
        gamma = min(gamma, omega)
    return gamma


@dataclass(frozen=True)
class RunConfig:
    alpha: float = 0.5
    eps: float = 0.5
    delta: float = 0.5
    p_f: float | None = None  # None: 1/n
    omega: int | None = None
    gamma: int | None = None
    d: int = DEFAULT_BLOCK_SIZE
    bigmove_d: int = DEFAULT_BIGMOVE_D
    memory: int = DEFAULT_MEMORY
    walk_bytes: int = WALK_RECORD_BYTES
    seed: int = 0
    c_omega: float = DEFAULT_C_OMEGA
    big_moves: bool = True
    alias_tree: bool = True
    aggregate_frontier: bool = True
    tree_split: str = "contiguous"
    workers: int = 1

    def __post_init__(self):
        _check_open_unit("alpha", self.alpha)
        _check_open_unit("eps", self.eps)
        _check_open_unit("delta", self.delta)
        if self.p_f is not None:
            _check_open_unit("p_f", self.p_f)
        if self.omega is not None and self.omega < 1:
            raise ValueError("omega must be >= 1")
        if self.gamma is not None and self.gamma < 1:
            raise ValueError("gamma must be >= 1")
        if self.omega is not None and self.gamma is not None and self.gamma > self.omega:
            raise ValueError(f"gamma ({self.gamma}) may not exceed omega ({self.omega})")
        if self.d < 2:
            raise ValueError("d must be >= 2")
        if self.bigmove_d < 1:
            raise ValueError("bigmove_d must be >= 1")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")

    def resolve(self, n: int) -> "RunConfig":
        """Fill in ``p_f``, ``omega`` and ``gamma`` for a graph with ``n`` nodes."""
        p_f = self.p_f if self.p_f is not None else 1.0 / max(n, 2)
        omega = self.omega or compute_omega(self.eps, self.delta, p_f, self.c_omega)
        gamma = self.gamma or autotune_gamma(max(n, 1), self.alpha, self.memory, self.walk_bytes, omega)
        return replace(self, p_f=p_f, omega=omega, gamma=min(gamma, omega))


class WalkRecord(NamedTuple):
    head: int
    tail: int
    terminated: bool


@dataclass
class WalkBatch:
    """Columnar walk records plus the fields that key their random streams."""

    head: np.ndarray
    tail: np.ndarray
    index: np.ndarray  # per-source walk number
    birth: np.ndarray  # round in which the walk was seeded

    @classmethod
    def empty(cls) -> "WalkBatch":
        z = np.zeros(0, dtype=np.int64)
        return cls(z, z.copy(), z.copy(), z.copy())

    def __len__(self) -> int:
        return len(self.head)

    def take(self, mask) -> "WalkBatch":
        return WalkBatch(self.head[mask], self.tail[mask], self.index[mask], self.birth[mask])

    def records(self, terminated: bool = False) -> Iterator[WalkRecord]:
        for h, t in zip(self.head.tolist(), self.tail.tolist()):
            yield WalkRecord(h, t, terminated)

    @staticmethod
    def concat(batches) -> "WalkBatch":
        batches = [b for b in batches if len(b)]
        if not batches:
            return WalkBatch.empty()
        if len(batches) == 1:
            return batches[0]
        return WalkBatch(*(np.concatenate([getattr(b, f) for b in batches]) for f in ("head", "tail", "index", "birth")))


def seed_pipeline(
    nodes, gamma: int, omega_remaining: int, round_idx: int = 0, first_index: int = 0
) -> tuple[WalkBatch, int]:
    """Seed ``min(gamma, omega_remaining)`` walks ``<v, v>`` per node.

    Walk numbers start at ``first_index`` so that walks of later pipelines
    get distinct random streams. Returns the batch and the remaining
    per-node budget.
    """
    nodes = np.asarray(nodes, dtype=np.int64)
    m = min(gamma, omega_remaining)
    if m <= 0 or len(nodes) == 0:
        return WalkBatch.empty(), max(omega_remaining - max(m, 0), 0)
    first = np.repeat(nodes, m)
    index = np.tile(np.arange(first_index, first_index + m, dtype=np.int64), len(nodes))
    return WalkBatch(first, first.copy(), index, np.full(len(first), round_idx, dtype=np.int64)), omega_remaining - m


@dataclass(eq=False)
class Samplers:
    """Per-node sampling structures, also flattened into arrays for vectorized draws."""

    kind: np.ndarray
    indptr: np.ndarray
    indices: np.ndarray
    flat_prob: np.ndarray
    flat_alias: np.ndarray
    tables: dict[int, AliasTable] = field(default_factory=dict)
    trees: dict[int, AliasTree] = field(default_factory=dict)
    big_moves: bm.BigMoveTable | None = None
    # packed alias trees
    tree_root: np.ndarray | None = None
    blk_start: np.ndarray | None = None
    blk_len: np.ndarray | None = None
    ent_prob: np.ndarray | None = None
    ent_alias: np.ndarray | None = None
    ent_child: np.ndarray | None = None
    ent_leaf: np.ndarray | None = None
    max_height: int = 0
    # packed big moves
    bm_indptr: np.ndarray | None = None
    bm_target: np.ndarray | None = None
    bm_mark: np.ndarray | None = None
    bm_prob: np.ndarray | None = None
    bm_alias: np.ndarray | None = None

    @classmethod
    def build(cls, g: WeightedGraph, cfg: RunConfig) -> "Samplers":
        stats = degree_stats(g)
        deg = g.out_degree
        kind = np.full(g.n, FLAT, dtype=np.int8)
        kind[deg == 0] = SINK
        if cfg.big_moves:
            small = [v for v in stats.small_nodes if deg[v] > 0]
            kind[small] = BIG
        else:
            small = []
        if cfg.alias_tree:
            # large takes precedence when a node is both small and large
            kind[sorted(stats.large_nodes)] = TREE
        kind[deg == 0] = SINK

        flat_prob = np.ones(g.n_edges)
        flat_alias = np.zeros(g.n_edges, dtype=np.int64)
        tables: dict[int, AliasTable] = {}
        routing = g.routing_probabilities()
        for v in np.flatnonzero(kind == FLAT).tolist():
            lo, hi = g.indptr[v], g.indptr[v + 1]
            prob, alias = _build_tables(routing[lo:hi])
            flat_prob[lo:hi] = prob
            flat_alias[lo:hi] = alias
            tables[v] = AliasTable(tuple(range(hi - lo)), prob, alias)

        out = cls(kind, g.indptr, g.indices, flat_prob, flat_alias, tables)
        tree_nodes = np.flatnonzero(kind == TREE).tolist()
        out.trees = {
            v: build_alias_tree(list(enumerate(g.routing(v).tolist())), cfg.d, cfg.tree_split, cfg.seed)
            for v in tree_nodes
        }
        out._pack_trees(g.n)
        bm_nodes = np.flatnonzero(kind == BIG).tolist()
        out.big_moves = bm.precompute_big_moves(g, bm_nodes, cfg.bigmove_d, cfg.alpha, cfg.aggregate_frontier)
        out.bm_indptr, out.bm_target, out.bm_mark, out.bm_prob, out.bm_alias = bm.pack(out.big_moves, g.n)
        return out

    def _pack_trees(self, n: int) -> None:
        blocks: list = []
        ids: dict[int, int] = {}
        self.tree_root = np.full(n, -1, dtype=np.int64)
        for v, tree in self.trees.items():
            for block in tree.blocks():
                ids[id(block)] = len(blocks)
                blocks.append(block)
            self.tree_root[v] = ids[id(tree.root)]
            self.max_height = max(self.max_height, tree.height)
        lens = np.array([len(b.table) for b in blocks], dtype=np.int64)
        self.blk_len = lens
        self.blk_start = np.concatenate([[0], np.cumsum(lens)[:-1]]) if len(lens) else lens
        total = int(lens.sum())
        self.ent_prob = np.empty(total)
        self.ent_alias = np.empty(total, dtype=np.int64)
        self.ent_child = np.full(total, -1, dtype=np.int64)
        self.ent_leaf = np.full(total, -1, dtype=np.int64)
        for i, block in enumerate(blocks):
            lo = self.blk_start[i]
            hi = lo + lens[i]
            self.ent_prob[lo:hi] = block.table.prob
            self.ent_alias[lo:hi] = block.table.alias
            if block.is_leaf:
                self.ent_leaf[lo:hi] = block.table.elements
            else:
                self.ent_child[lo:hi] = [ids[id(c)] for c in block.children]


def _alias_pick(start, length, prob, alias, u1, u2):
    """Vectorized alias draw; returns offsets local to each table."""
    i = np.minimum((u1 * length).astype(np.int64), length - 1)
    return np.where(u2 < prob[start + i], i, alias[start + i])


class RoundOutcome(NamedTuple):
    active: WalkBatch
    terminated: WalkBatch
    events: int


def extend_round(walks: WalkBatch, samplers: Samplers, alpha: float, seed: int, round_idx: int) -> RoundOutcome:
    """Advance every walk by one sampling event.

    A walk parked on a sink is first moved back to its head. Walks on a
    small node take a big move (which fixes termination by its mark);
    everything else takes one routed step followed by a termination coin.
    """
    if not len(walks):
        return RoundOutcome(WalkBatch.empty(), WalkBatch.empty(), 0)
    head = walks.head
    tail = walks.tail.copy()
    kind = samplers.kind[tail]
    at_sink = kind == SINK
    if at_sink.any():
        tail[at_sink] = head[at_sink]
        kind = samplers.kind[tail]

    keys = stream_keys(seed, head, walks.index, round_idx - walks.birth)
    u1 = uniforms(keys, 0)
    u2 = uniforms(keys, 1)
    new_tail = np.empty_like(tail)
    done = uniforms(keys, SLOT_COIN) < alpha

    sel = np.flatnonzero(kind == FLAT)
    if sel.size:
        u = tail[sel]
        start = samplers.indptr[u]
        deg = samplers.indptr[u + 1] - start
        j = _alias_pick(start, deg, samplers.flat_prob, samplers.flat_alias, u1[sel], u2[sel])
        new_tail[sel] = samplers.indices[start + j]

    sel = np.flatnonzero(kind == TREE)
    if sel.size:
        u = tail[sel]
        block = samplers.tree_root[u]
        leaf = np.full(sel.size, -1, dtype=np.int64)
        pending = np.arange(sel.size)
        level = 0
        while pending.size:
            b = block[pending]
            start = samplers.blk_start[b]
            sub_keys = keys[sel[pending]]
            j = _alias_pick(
                start, samplers.blk_len[b], samplers.ent_prob, samplers.ent_alias,
                uniforms(sub_keys, 2 * level), uniforms(sub_keys, 2 * level + 1),
            )
            entry = start + j
            is_leaf = samplers.ent_leaf[entry] >= 0
            leaf[pending[is_leaf]] = samplers.ent_leaf[entry[is_leaf]]
            block[pending[~is_leaf]] = samplers.ent_child[entry[~is_leaf]]
            pending = pending[~is_leaf]
            level += 1
        new_tail[sel] = samplers.indices[samplers.indptr[u] + leaf]

    sel = np.flatnonzero(kind == BIG)
    if sel.size:
        u = tail[sel]
        start = samplers.bm_indptr[u]
        count = samplers.bm_indptr[u + 1] - start
        j = _alias_pick(start, count, samplers.bm_prob, samplers.bm_alias, u1[sel], u2[sel])
        new_tail[sel] = samplers.bm_target[start + j]
        done[sel] = samplers.bm_mark[start + j] == bm.TERMINATED

    moved = WalkBatch(head, new_tail, walks.index, walks.birth)
    return RoundOutcome(moved.take(~done), moved.take(done), len(walks))


@dataclass(frozen=True)
class RoundTelemetry:
    round: int
    active: int
    terminated: int
    pipelines_started: int
    peak_bytes_est: int
    over_budget: bool = False

    def tsv(self) -> str:
        return f"{self.round}\t{self.active}\t{self.terminated}\t{self.pipelines_started}\t{self.peak_bytes_est}"


TELEMETRY_HEADER = "round\tactive\tterminated\tpipelines_started\tpeak_bytes_est"


@dataclass
class RunResult:
    store: EstimateStore
    config: RunConfig
    telemetry: list[RoundTelemetry]
    pipelines: int
    rounds: int
    sampling_events: int

    @property
    def max_active(self) -> int:
        return max((t.active for t in self.telemetry), default=0)

    def write_telemetry(self, fh: IO[str]) -> None:
        fh.write(TELEMETRY_HEADER + "\n")
        for t in self.telemetry:
            fh.write(t.tsv() + "\n")


def _extend_parallel(pool, walks: WalkBatch, samplers, cfg: RunConfig, round_idx: int) -> RoundOutcome:
    if pool is None or len(walks) < 2 * cfg.workers:
        return extend_round(walks, samplers, cfg.alpha, cfg.seed, round_idx)
    bounds = np.linspace(0, len(walks), cfg.workers + 1).astype(np.int64)
    chunks = [walks.take(slice(lo, hi)) for lo, hi in zip(bounds[:-1], bounds[1:])]
    parts = list(pool.map(lambda c: extend_round(c, samplers, cfg.alpha, cfg.seed, round_idx), chunks))
    return RoundOutcome(
        WalkBatch.concat([p.active for p in parts]),
        WalkBatch.concat([p.terminated for p in parts]),
        sum(p.events for p in parts),
    )


def run_fappr(
    g: WeightedGraph,
    cfg: RunConfig,
    samplers: Samplers | None = None,
    on_round: Callable[[RoundTelemetry], None] | None = None,
) -> RunResult:
    """Estimate PPR from every node with ``omega`` walks each.

    Sources that are sinks are never simulated; all their mass stays on
    themselves. The result is a function of ``cfg.seed`` alone and does not
    depend on ``cfg.workers``.
    """
    cfg = cfg.resolve(g.n)
    if samplers is None:
        samplers = Samplers.build(g, cfg)
    store = EstimateStore(cfg.omega)
    sink_sources = np.flatnonzero(samplers.kind == SINK)
    for s in sink_sources.tolist():
        store.record(s, s, cfg.omega)
    nodes = np.flatnonzero(samplers.kind != SINK)

    budget = cfg.omega
    pipelines = 0
    round_idx = 0
    events = 0
    active = WalkBatch.empty()
    telemetry: list[RoundTelemetry] = []
    finished_heads: list[np.ndarray] = []
    finished_tails: list[np.ndarray] = []
    pool = ThreadPoolExecutor(cfg.workers) if cfg.workers > 1 else None
    try:
        while len(active) or budget > 0:
            if budget > 0:
                seeded, remaining = seed_pipeline(nodes, cfg.gamma, budget, round_idx, cfg.omega - budget)
                budget = remaining
                pipelines += 1
                active = WalkBatch.concat([active, seeded])
            s_i = len(active)
            outcome = _extend_parallel(pool, active, samplers, cfg, round_idx)
            events += outcome.events
            finished_heads.append(outcome.terminated.head)
            finished_tails.append(outcome.terminated.tail)
            active = outcome.active
            peak = s_i * cfg.walk_bytes
            over = peak > MEMORY_SLACK * cfg.memory
            if over:
                log.warning("round %d: %d active walks (~%d bytes) exceed memory budget %d", round_idx, s_i, peak, cfg.memory)
            tel = RoundTelemetry(round_idx, s_i, len(outcome.terminated), pipelines, peak, over)
            telemetry.append(tel)
            if on_round is not None:
                on_round(tel)
            round_idx += 1
    finally:
        if pool is not None:
            pool.shutdown()

    if finished_heads:
        store.record_many(np.concatenate(finished_heads), np.concatenate(finished_tails), max(g.n, 1))
    return RunResult(store, cfg, telemetry, pipelines, round_idx, events)
