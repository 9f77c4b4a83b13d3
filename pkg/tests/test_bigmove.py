import random
from collections import Counter

import pytest

from fappr.bigmove import ACTIVE, TERMINATED, BigMove, precompute_big_moves, sample_big_move, to_dict
from fappr.datasets import power_law_graph
from fappr.graph import degree_stats, from_edges, sinks
from fappr.oracle import enumerate_walks


def test_toy_node_two_moves(toy):
    table = precompute_big_moves(toy, [2], d=4, alpha=0.5)
    assert to_dict(table.moves[2]) == {(3, 0): 0.625, (4, 0): 0.25, (3, 1): 0.125}
    assert table.iterations[2] == 2


def test_zero_iterations_when_d_is_one():
    g = from_edges([(0, 1), (1, 0)])
    table = precompute_big_moves(g, [0], d=1, alpha=0.3)
    assert table.iterations[0] == 0
    assert to_dict(table.moves[0]) == {(1, TERMINATED): 0.3, (1, ACTIVE): 0.7}


@pytest.mark.parametrize("d", [1, 2, 4, 8, 32])
def test_matches_path_enumeration(toy, d):
    small = [v for v in degree_stats(toy).small_nodes if v not in sinks(toy)]
    table = precompute_big_moves(toy, small, d=d, alpha=0.5)
    for v in small:
        moves = to_dict(table.moves[v])
        assert abs(sum(moves.values()) - 1.0) <= 1e-12
        ref = enumerate_walks(toy, v, table.depth(v), 0.5)
        ref = {k: p for k, p in ref.items() if p > 0}
        assert moves.keys() == ref.keys()
        for key, p in ref.items():
            assert moves[key] == pytest.approx(p, abs=1e-9)


def test_power_law_masses_close():
    g = power_law_graph(300, seed=1, allow_sinks=True)
    small = [v for v in degree_stats(g).small_nodes if g.out_degree[v] > 0]
    table = precompute_big_moves(g, small, d=12, alpha=0.2)
    for v in small[:60]:
        moves = to_dict(table.moves[v])
        assert abs(sum(moves.values()) - 1.0) <= 1e-12
        ref = enumerate_walks(g, v, table.depth(v), 0.2)
        for key, p in ref.items():
            assert moves.get(key, 0.0) == pytest.approx(p, abs=1e-9)


def test_raw_frontier_counting_stops_no_later(toy):
    agg = precompute_big_moves(toy, [1], d=10, alpha=0.5, aggregate_frontier=True)
    raw = precompute_big_moves(toy, [1], d=10, alpha=0.5, aggregate_frontier=False)
    assert raw.iterations[1] <= agg.iterations[1]
    assert sum(m.p for m in raw.moves[1]) == pytest.approx(1.0, abs=1e-12)
    assert len({(m.target, m.mark) for m in raw.moves[1]}) == len(raw.moves[1])


def test_entries_are_aggregated(toy):
    table = precompute_big_moves(toy, [1, 2, 3, 4, 5, 6], d=16, alpha=0.5)
    for moves in table.moves.values():
        assert len({(m.target, m.mark) for m in moves}) == len(moves)


def test_sink_reached_by_frontier_is_frozen(toy):
    table = precompute_big_moves(toy, [5], d=16, alpha=0.5)
    assert to_dict(table.moves[5]) == {(7, 0): 0.5, (7, 1): 0.5}


def test_validation(toy):
    with pytest.raises(ValueError):
        precompute_big_moves(toy, [2], d=4, alpha=1.0)
    with pytest.raises(ValueError):
        precompute_big_moves(toy, [7], d=4, alpha=0.5)


def test_sampling_frequencies(toy):
    table = precompute_big_moves(toy, [2], d=4, alpha=0.5)
    rng = random.Random(99)
    n = 1_000_000
    draws = Counter(sample_big_move(table, 2, rng) for _ in range(n))
    by_key = {(m.target, m.mark): c / n for m, c in draws.items()}
    assert abs(by_key[(3, 0)] - 0.625) <= 0.005
    assert abs(by_key[(4, 0)] - 0.25) <= 0.005
    assert abs(by_key[(3, 1)] - 0.125) <= 0.005
    active = sum(c for m, c in draws.items() if m.mark == ACTIVE) / n
    assert abs(active - 0.125) <= 0.005


def test_single_move_always_chosen():
    g = from_edges([(0, 1), (1, 1)])
    # from 0 every walk reaches 1 and stays; alpha close to 1 is not needed
    table = precompute_big_moves(g, [0], d=1, alpha=0.5)
    assert len(table.moves[0]) == 2
    g2 = from_edges([(0, 0)])
    t2 = precompute_big_moves(g2, [0], d=1, alpha=0.5)
    rng = random.Random(0)
    assert {sample_big_move(t2, 0, rng).target for _ in range(100)} == {0}


def test_missing_node(toy):
    table = precompute_big_moves(toy, [2], d=4, alpha=0.5)
    with pytest.raises(KeyError):
        sample_big_move(table, 3, random.Random(0))
    assert isinstance(table.moves[2][0], BigMove)
