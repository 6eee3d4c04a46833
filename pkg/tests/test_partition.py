import json
import math

import pytest
from hypothesis import given, strategies as st

from hamdec.digraph import BipartiteDigraph, Side, VertexId, bits_of
from hamdec.errors import ConstructionFailure, DomainError
from hamdec.generators import complete_bipartite, random_regular_bipartite_digraph
from hamdec.partition import (PartitionConfig, assignment_probabilities, build_partition_plan,
                              failed_checks, random_equipartitions, verify_plan)


@pytest.fixture(scope="module")
def plan200():
    d = random_regular_bipartite_digraph(200, 120, seed=2)
    cfg = PartitionConfig(K=2, epsilon=0.05, c=0.6, retry_budget=2)
    return d, cfg, build_partition_plan(d, cfg, seed=2)


def test_equipartition_examples():
    (only,) = random_equipartitions(4, 1, seed=0)
    assert only.parts_a == ((0, 1, 2, 3),) and only.parts_b == ((0, 1, 2, 3),)
    for eq in random_equipartitions(9, 3, seed=1):
        assert all(len(p) == 1 for p in eq.parts_a + eq.parts_b)
    eqs = random_equipartitions(100, 3, seed=2)
    assert len(eqs) == 3
    for eq in eqs:
        for parts in (eq.parts_a, eq.parts_b):
            assert len(parts) == 9
            assert {len(p) for p in parts} <= {11, 12}
            assert sorted(x for p in parts for x in p) == list(range(100))
    with pytest.raises(DomainError):
        random_equipartitions(3, 2)


@given(st.integers(2, 6), st.floats(0.001, 0.999))
def test_probability_identity(K, eps):
    p_in, p_out = assignment_probabilities(K, eps)
    assert math.isclose(2 * K * p_in + (K ** 3 - 2 * K) * p_out, 1.0)


def test_config_validation():
    with pytest.raises(DomainError):
        PartitionConfig(K=1)
    with pytest.raises(DomainError):
        PartitionConfig(epsilon=0)
    with pytest.raises(DomainError):
        PartitionConfig(retry_budget=0)
    with pytest.raises(DomainError):
        PartitionConfig(c=0.5, epsilon=0.05, strict=True)


def test_plan_structure(plan200):
    d, cfg, plan = plan200
    rep = plan.report
    assert plan.count == 8
    for key in ("edge_disjoint", "spanning", "subgraph_of_input", "edge_conservation",
                "membership_count", "probability_identity", "P1_sizes"):
        assert rep[key]["pass"], key
    assert sum(h.num_edges for h in plan.subgraphs) + plan.discarded_edges == d.num_edges
    for key in ("P2_inner_degrees", "P3_reservoir_access", "P4_reservoir_density"):
        assert math.isfinite(rep[key]["gap"])
    json.loads(plan.to_json())


def test_plan_vertex_sets(plan200):
    _, _, plan = plan200
    for i in range(plan.count):
        w, u = set(plan.w_vertices(i)), set(plan.u_vertices(i))
        assert not w & u and len(w | u) == 400
        assert abs(sum(v.side is Side.A for v in w) - 50) <= 1


def test_edges_follow_colour_rule(plan200):
    d, _, plan = plan200

    def inside(x, j):
        return (plan.wa if x.side is Side.A else plan.wb)[j] >> x.index & 1

    for i, h in enumerate(plan.subgraphs):
        for u, v in h.edges():
            assert d.has_edge(u, v)
            colours = [j for j in range(plan.count) if inside(u, j) and inside(v, j)]
            # either a singly coloured reservoir edge of W_i or an uncoloured edge
            assert colours in ([i], [])


def test_verify_detects_duplicated_edge(plan200):
    d, cfg, plan = plan200
    h0, h1 = plan.subgraphs[0], plan.subgraphs[1]
    u, v = next(h0.edges())
    out_a = list(h1.out_a)
    out_b = list(h1.out_b)
    (out_a if u.side is Side.A else out_b)[u.index] |= 1 << v.index
    plan.subgraphs[1] = BipartiteDigraph(h1.n_a, h1.n_b, out_a, out_b)
    try:
        rep = verify_plan(d, plan, cfg)
        assert not rep["edge_disjoint"]["pass"]
        assert f"{u}->{v}" in rep["edge_disjoint"]["witness"]
    finally:
        plan.subgraphs[1] = h1


def test_strict_small_complete_graph_fails_with_report():
    with pytest.raises(ConstructionFailure) as exc:
        build_partition_plan(complete_bipartite(16), PartitionConfig(K=2, strict=True, retry_budget=2))
    assert exc.value.report["failed"]


def test_practical_small_complete_graph_is_degraded():
    plan = build_partition_plan(complete_bipartite(16), PartitionConfig(K=2, retry_budget=2))
    assert plan.degraded and failed_checks(plan.report) == plan.report["failed"]


def test_rejects_irregular_input():
    g = BipartiteDigraph(2, 2, [3, 1], [3, 3])
    with pytest.raises(DomainError):
        build_partition_plan(g)
    with pytest.raises(DomainError):
        build_partition_plan(BipartiteDigraph(2, 3, [7, 7], [3, 3, 3]))


def test_reservoir_degree_concentration():
    """Deviation of d(v, S_ik) from d|S_ik|/2n stays within 2 sqrt(s log n) for >= 95% of samples."""
    n, K = 200, 2
    s = n / K ** 2
    bound = 2 * math.sqrt(s * math.log(n))
    within = total = 0
    for seed in range(30):
        g = random_regular_bipartite_digraph(n, 120, seed=seed)
        for eq in random_equipartitions(n, K, seed=seed):
            masks = {Side.A: [bits_of(p) for p in eq.parts_a], Side.B: [bits_of(p) for p in eq.parts_b]}
            for v in g.vertices():
                for direction in ("out", "in"):
                    row = g.nbits(v, direction)
                    for k, mask in enumerate(masks[v.side.other]):
                        size = 2 * mask.bit_count()
                        dev = abs((row & mask).bit_count() - 120 * size / (2 * n))
                        within += dev <= bound
                        total += 1
    assert within / total >= 0.95


@given(st.integers(4, 30), st.integers(0, 50))
def test_p1_always_holds(n, seed):
    g = random_regular_bipartite_digraph(n, max(1, n // 2), seed=seed)
    plan = build_partition_plan(g, PartitionConfig(K=2, retry_budget=1), seed=seed)
    assert plan.report["P1_sizes"]["pass"] and plan.report["edge_disjoint"]["pass"]
