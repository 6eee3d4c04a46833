import pytest

from hamdec.digraph import A, B, Side
from hamdec.errors import ConstructionFailure, DomainError
from hamdec.generators import complete_bipartite, random_regular_bipartite_digraph
from hamdec.matchings import EXACT, Thresholds
from hamdec.pathcover import (PathCover, PathCoverConfig, block_partition, block_paths,
                              build_path_covers, matching_chain_for_path, union_out_degrees)


def test_path_cover_from_edges():
    verts = [A(0), A(1), B(0), B(1)]
    cov = PathCover.from_edges(verts, [(A(0), B(1)), (B(1), A(1))])
    assert sorted(cov.paths) == sorted([(A(0), B(1), A(1)), (B(0),)])
    assert set(cov.starts) == {A(0), B(0)} and set(cov.ends) == {A(1), B(0)}
    assert cov.index[A(1)] == cov.index[A(0)]
    with pytest.raises(DomainError):
        PathCover.from_edges(verts, [(A(0), B(0)), (A(0), B(1))])
    with pytest.raises(DomainError):
        PathCover.from_edges(verts, [(A(0), B(0)), (B(0), A(0))])


def test_block_partition_trivial_and_forced():
    one = block_partition(complete_bipartite(5), 1)
    assert one.b == 1 and one.report["pass"] and len(one.blocks_a[0]) == 5
    three = block_partition(complete_bipartite(12), 3)
    assert three.report["pass"] and three.report["worst_deviation"] == 0
    assert all(len(blk) == 4 for blk in three.blocks_a + three.blocks_b)


def test_block_partition_random_host_reports():
    h = random_regular_bipartite_digraph(60, 20, seed=4)
    part = block_partition(h, 4, seed=1, retry_budget=5)
    assert set(part.report) >= {"pass", "worst_deviation", "window", "worst", "r"}
    assert part.degraded == (not part.report["pass"])
    with pytest.raises(DomainError):
        block_partition(h, 61)


def test_block_partition_strict_failure_names_offender():
    h = random_regular_bipartite_digraph(60, 20, seed=4)
    with pytest.raises(ConstructionFailure, match="worst"):
        block_partition(h, 4, window_exp=0.01, retry_budget=2, strict=True)


def test_chain_b1():
    h = complete_bipartite(3)
    blocks = block_partition(h, 1)
    (view,) = matching_chain_for_path(h, blocks, block_paths(1)[0])
    assert view.num_edges == 9 and all(u.side is Side.A for u, _ in view.edges())


def test_chain_b2_orientations_and_sizes():
    h = complete_bipartite(6)
    blocks = block_partition(h, 2)
    path = [A(0), B(0), A(1), B(1)]
    views = matching_chain_for_path(h, blocks, path)
    assert len(views) == 3
    sides = [(v.xs[0].side, v.ys[0].side) for v in views]
    assert sides == [(Side.A, Side.B), (Side.B, Side.A), (Side.A, Side.B)]
    assert all(v.num_edges == 36 // 4 for v in views)


def test_chain_rejects_malformed_paths():
    h = complete_bipartite(4)
    blocks = block_partition(h, 2)
    for bad in ([B(0), A(0), B(1), A(1)], [A(0), B(0), A(0), B(1)], [A(0), B(0), A(1)],
                [A(0), A(1), B(0), B(1)]):
        with pytest.raises(DomainError):
            matching_chain_for_path(h, blocks, bad)


def test_complete_b1_gives_matching_covers():
    m = 5
    coll = build_path_covers(complete_bipartite(m), cfg=PathCoverConfig(b=1, thresholds=EXACT))
    assert len(coll.covers) == m
    assert all(len(c) == m and all(len(p) == 2 for p in c.paths) for c in coll.covers)


@pytest.mark.parametrize("b", [2, 3, 4])
def test_cover_size_accounting(b):
    m = 12 * b
    h = random_regular_bipartite_digraph(m, m // 2, seed=b)
    coll = build_path_covers(h, cfg=PathCoverConfig(b=b, thresholds=Thresholds()), seed=b)
    k = m / b
    for cov in coll.covers:
        assert len(cov) <= k + (2 * b - 1) * k ** (7 / 8)
        assert len(cov) == 2 * m - len(cov.edges())


def test_covers_partition_and_are_disjoint():
    h = random_regular_bipartite_digraph(24, 12, seed=7)
    coll = build_path_covers(h, cfg=PathCoverConfig(b=2, thresholds=Thresholds(count=None, size=0.5,
                                                                                 degree=None, window=None)))
    assert coll.covers
    verts = set(h.vertices())
    for cov in coll.covers:
        seen = [v for p in cov.paths for v in p]
        assert len(seen) == len(set(seen)) == len(verts)
        assert all(h.has_edge(u, v) for u, v in cov.edges())
    edge_sets = [set(c.edges()) for c in coll.covers]
    for i in range(len(edge_sets)):
        for j in range(i + 1, len(edge_sets)):
            assert not edge_sets[i] & edge_sets[j]
    deg = union_out_degrees(h, coll.covers)
    for v in verts:
        assert deg[v] == sum(v not in c.ends for c in coll.covers)


def test_strict_targets_fail_at_desk_scale():
    h = random_regular_bipartite_digraph(24, 12, seed=7)
    with pytest.raises(ConstructionFailure):
        build_path_covers(h, cfg=PathCoverConfig(b=2, strict=True, retry_budget=2))
