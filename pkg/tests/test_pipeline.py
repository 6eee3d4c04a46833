import json
import random

import pytest

from hamdec.digraph import A, B, BipartiteDigraph, Side, VertexId, cycle_edges, path_edges
from hamdec.errors import ConstructionFailure, DomainError
from hamdec.generators import (complete_bipartite, directed_four_cycle, diregular_tournament,
                               random_regular_bipartite_digraph)
from hamdec.pipeline import (DecompositionConfig, _split_reservoir, audit_result, close_cover, decompose,
                             greedy_ham_cycle, pick_connectors, stage_stats, stage_stats_json)
from hamdec.verify import brute_force_max_disjoint_ham_cycles, is_ham_cycle, pairwise_edge_disjoint

U_PATH = (A(0), B(0), A(1), B(1), A(2), B(2), A(3), B(3))
W = [A(4), A(5), B(4), B(5)]


def stitch_instance():
    """Twelve vertices: a Hamilton path through U, a complete D_{2,2} on W, and two connector edges."""
    edges = path_edges(U_PATH)
    edges += [(a, b) for a in W[:2] for b in W[2:]] + [(b, a) for a in W[:2] for b in W[2:]]
    edges += [(B(3), A(4)), (B(5), A(0))]
    return BipartiteDigraph.from_edges(6, 6, edges)


def test_pick_connectors_single_path():
    f = stitch_instance()
    (pair,) = pick_connectors(f, [(A(0), B(3))], W)
    s, t = pair
    assert f.has_edge(B(3), s) and f.has_edge(t, A(0)) and s != t
    assert pair == (A(4), B(5))


def test_pick_connectors_failure_names_endpoint():
    f = stitch_instance()
    with pytest.raises(ConstructionFailure, match="A0"):
        pick_connectors(f, [(A(0), B(3))], [A(4), A(5), B(4)])


def test_pick_connectors_are_balanced():
    g = complete_bipartite(10)
    w = [VertexId(Side.A, i) for i in range(6, 10)] + [VertexId(Side.B, i) for i in range(6, 10)]
    endpoints = [(A(0), B(0)), (B(1), B(2)), (A(1), A(2))]
    conn = pick_connectors(g, endpoints, w)
    flat = [v for pair in conn for v in pair]
    assert len(set(flat)) == 6
    assert sum(v.side is Side.A for v in flat) == 3


def test_close_cover_hand_instance():
    f = stitch_instance()
    conn = pick_connectors(f, [(A(0), B(3))], W)
    cyc = close_cover(f, [U_PATH], W, conn)
    assert is_ham_cycle(f, cyc)
    assert set(path_edges(U_PATH)) <= set(cycle_edges(cyc))


@pytest.mark.parametrize("seed", range(5))
def test_reservoir_split_rules(seed):
    rng = random.Random(seed)
    w = [A(i) for i in range(8)] + [B(i) for i in range(8)]
    conn = [(A(0), A(1)), (B(0), B(1)), (A(2), B(2)), (B(3), A(3))]
    parts = _split_reservoir(w, conn, rng)
    sizes = [len(p) for p in parts]
    assert max(sizes) - min(sizes) <= 2
    assert sorted(v for p in parts for v in p) == sorted(w)
    for (s, t), part in zip(conn, parts):
        na = sum(v.side is Side.A for v in part)
        nb = len(part) - na
        if s.side is t.side:
            assert abs(na - nb) == 1 and (na > nb) == (s.side is Side.A)
        else:
            assert na == nb


def test_decompose_four_cycle():
    for mode in ("greedy", "practical"):
        res = decompose(directed_four_cycle(), DecompositionConfig(mode=mode))
        assert len(res.cycles) == 1 and res.leftover == 0 and res.residual_edges == 0


def test_decompose_strict_records_failed_stage():
    res = decompose(directed_four_cycle(), DecompositionConfig(mode="strict"))
    assert res.cycles == [] and res.stats["failed_stage"]
    rep = stage_stats(res)
    assert rep["cycles"] == 0 and rep["achieved_fraction"] == 0


@pytest.mark.parametrize("n", [3, 5, 8])
def test_decompose_complete_graph(n):
    g = complete_bipartite(n)
    res = decompose(g, DecompositionConfig(mode="greedy", seed=n))
    assert 1 <= len(res.cycles) <= n
    assert all(is_ham_cycle(g, c) for c in res.cycles)


@pytest.mark.parametrize("seed", range(4))
def test_greedy_matches_oracle_on_small_tournaments(seed):
    g = diregular_tournament(4, seed)
    best, _ = brute_force_max_disjoint_ham_cycles(g)
    res = decompose(g, DecompositionConfig(mode="greedy", seed=seed))
    assert len(res.cycles) == best == 2


@pytest.mark.parametrize("mode", ["strict", "practical", "greedy"])
def test_decompose_soundness_and_accounting(mode):
    g = random_regular_bipartite_digraph(30, 16, seed=3)
    res = decompose(g, DecompositionConfig(mode=mode, seed=3))
    assert all(is_ham_cycle(g, c) for c in res.cycles)
    assert pairwise_edge_disjoint(res.cycles)
    assert 2 * g.n_a * len(res.cycles) + res.residual_edges == g.num_edges
    rep = stage_stats(res)
    assert 0 <= rep["achieved_fraction"] <= 1
    assert rep["structured_cycles"] + rep["fallback_cycles"] == len(res.cycles) or mode == "greedy"
    json.loads(stage_stats_json(res))


def test_practical_report_fields():
    g = random_regular_bipartite_digraph(60, 36, seed=1)
    res = decompose(g, DecompositionConfig(mode="practical", seed=1))
    rep = stage_stats(res)
    for key in ("K", "covers_per_subgraph", "stitch_success_rate", "achieved_fraction", "wall_time", "plan"):
        assert key in rep
    assert len(rep["covers_per_subgraph"]) == rep["K"] ** 3
    assert rep["audit"]["ok"] and rep["audit"]["accounting_identity"]
    assert res.leftover == res.residual_edges


def test_greedy_residual_stays_regular():
    g = random_regular_bipartite_digraph(12, 8, seed=5)
    res = decompose(g, DecompositionConfig(mode="greedy", seed=5))
    residual = set(g.edges()) - {e for c in res.cycles for e in cycle_edges(c)}
    outs = {}
    for u, _ in residual:
        outs[u] = outs.get(u, 0) + 1
    assert set(outs.values()) <= {8 - len(res.cycles)}


def test_greedy_ham_cycle_on_dense_graph():
    g = random_regular_bipartite_digraph(40, 20, seed=2)
    cyc = greedy_ham_cycle(g, random.Random(0))
    assert cyc is not None and is_ham_cycle(g, cyc)


def test_audit_catches_a_bad_result():
    g = complete_bipartite(3)
    res = decompose(g, DecompositionConfig(mode="greedy"))
    res.cycles.append(res.cycles[0])
    assert not audit_result(g, res)["ok"]


def test_input_validation():
    with pytest.raises(DomainError):
        decompose(BipartiteDigraph(2, 2, [3, 1], [3, 3]))
    with pytest.raises(DomainError):
        DecompositionConfig(mode="fast")
