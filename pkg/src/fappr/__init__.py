"""Monte Carlo estimation of edge-weighted personalized PageRank for all node pairs."""
from .alias import AliasTable, AliasTree, build_alias, build_alias_tree, sample_alias, sample_alias_tree
from .bigmove import BigMove, BigMoveTable, precompute_big_moves, sample_big_move
from .engine import RunConfig, RunResult, autotune_gamma, compute_omega, extend_round, run_fappr, seed_pipeline
from .estimate import EstimateStore
from .estimators import ExactPPR, MonteCarloPPR
from .graph import DegreeStats, WeightedGraph, degree_stats, from_edges, load_edge_list, routing_probability, sinks
from .metrics import RankedList, map_at_k, ndcg_at_k
from .oracle import ExactPpr, enumerate_walks, exact_ppr

__version__ = "0.1.0"
