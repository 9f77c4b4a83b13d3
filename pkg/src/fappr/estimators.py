"""scikit-learn style wrappers around the walk engine and the exact oracle.

``fit`` takes a graph (or an edge array); ``transform`` returns dense PPR
rows for the requested sources, or for every node when handed the graph
again, so ``fit_transform(graph)`` yields the full ``n x n`` matrix.
"""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from . import _validation as V
from .engine import DEFAULT_BIGMOVE_D, DEFAULT_C_OMEGA, DEFAULT_MEMORY, RunConfig, run_fappr
from .alias import DEFAULT_BLOCK_SIZE
from .graph import WeightedGraph
from .oracle import DEFAULT_TOL, exact_ppr


class _PprTransformer(TransformerMixin, BaseEstimator):
    def _rows(self, sources: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def transform(self, X):
        check_is_fitted(self, "graph_")
        if X is None or isinstance(X, WeightedGraph) or np.ndim(X) == 2:
            sources = np.arange(self.graph_.n)
        else:
            sources = V.check_sources(X, self.graph_.n)
        return self._rows(sources)

    def top_k(self, source: int, k: int) -> list[tuple[int, float]]:
        row = self.transform([source])[0]
        order = sorted(np.flatnonzero(row).tolist(), key=lambda t: (-row[t], t))
        return [(t, float(row[t])) for t in order[:k]]


class MonteCarloPPR(_PprTransformer):
    """Pipelined random-walk estimator of all-pairs PPR.

    Parameters mirror :class:`fappr.engine.RunConfig`. After ``fit``:
    ``graph_``, ``config_`` (with resolved ``omega``/``gamma``),
    ``estimates_`` (an :class:`EstimateStore`), ``telemetry_``,
    ``n_pipelines_``, ``n_rounds_`` and ``n_sampling_events_``.
    """

    def __init__(
        self,
        alpha=0.5,
        eps=0.5,
        delta=0.5,
        p_f=None,
        omega=None,
        gamma=None,
        d=DEFAULT_BLOCK_SIZE,
        bigmove_d=DEFAULT_BIGMOVE_D,
        memory=DEFAULT_MEMORY,
        c_omega=DEFAULT_C_OMEGA,
        big_moves=True,
        alias_tree=True,
        workers=1,
        seed=0,
    ):
        self.alpha = alpha
        self.eps = eps
        self.delta = delta
        self.p_f = p_f
        self.omega = omega
        self.gamma = gamma
        self.d = d
        self.bigmove_d = bigmove_d
        self.memory = memory
        self.c_omega = c_omega
        self.big_moves = big_moves
        self.alias_tree = alias_tree
        self.workers = workers
        self.seed = seed

    def _config(self) -> RunConfig:
        return RunConfig(
            alpha=V.check_unit_interval("alpha", self.alpha),
            eps=V.check_unit_interval("eps", self.eps),
            delta=V.check_unit_interval("delta", self.delta),
            p_f=None if self.p_f is None else V.check_unit_interval("p_f", self.p_f),
            omega=V.check_positive_int("omega", self.omega, allow_none=True),
            gamma=V.check_positive_int("gamma", self.gamma, allow_none=True),
            d=V.check_positive_int("d", self.d),
            bigmove_d=V.check_positive_int("bigmove_d", self.bigmove_d),
            memory=V.check_positive_int("memory", self.memory),
            c_omega=float(self.c_omega),
            big_moves=bool(self.big_moves),
            alias_tree=bool(self.alias_tree),
            workers=V.check_positive_int("workers", self.workers),
            seed=int(self.seed),
        )

    def fit(self, X, y=None):
        graph = V.check_graph(X)
        result = run_fappr(graph, self._config())
        self.graph_ = graph
        self.config_ = result.config
        self.estimates_ = result.store
        self.telemetry_ = result.telemetry
        self.n_pipelines_ = result.pipelines
        self.n_rounds_ = result.rounds
        self.n_sampling_events_ = result.sampling_events
        return self

    def _rows(self, sources):
        out = np.zeros((len(sources), self.graph_.n))
        pos = {s: i for i, s in enumerate(sources.tolist())}
        for (s, t), c in self.estimates_.counts.items():
            if s in pos:
                out[pos[s], t] = c / self.estimates_.omega
        return out


class ExactPPR(_PprTransformer):
    """Truncated power-series PPR under the same walk semantics as the engine."""

    def __init__(self, alpha=0.5, tol=DEFAULT_TOL):
        self.alpha = alpha
        self.tol = tol

    def fit(self, X, y=None):
        graph = V.check_graph(X)
        V.check_unit_interval("alpha", self.alpha)
        V.check_unit_interval("tol", self.tol)
        self.graph_ = graph
        self.ppr_ = exact_ppr(graph, self.alpha, self.tol)
        return self

    def _rows(self, sources):
        return self.ppr_.matrix[sources].copy()
