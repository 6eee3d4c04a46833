import random

import pytest
from hypothesis import given, strategies as st

from hamdec.digraph import A, B, BipartiteDigraph, Digraph, min_max_semidegree, remove_edges
from hamdec.errors import DomainError
from hamdec.generators import (complete_bipartite, directed_four_cycle, diregular_tournament,
                               ham_decompose_complete, shift_cycle)
from hamdec.verify import (all_ham_cycles, brute_force_max_disjoint_ham_cycles,
                           enumerate_ham_st_paths, is_ham_cycle, is_ham_path, pairwise_edge_disjoint)

from conftest import random_bipartite
from oracles import count_ham_cycles, count_ham_paths

# a balanced digraph with m' = 3 and min semidegree 2 but no Hamilton A2-B0 path
COUNTEREXAMPLE = BipartiteDigraph(3, 3, [0b110, 0b111, 0b011], [0b111, 0b111, 0b101])


def test_is_ham_cycle_examples():
    four = directed_four_cycle()
    assert is_ham_cycle(four, [A(0), B(0), A(1), B(1)])
    rep = is_ham_cycle(four, [A(0), B(0), A(0), B(1)])
    assert not rep and rep.witness == A(0) and not rep.checks["distinct"]
    assert is_ham_cycle(complete_bipartite(3), shift_cycle(3, 1))


def test_is_ham_cycle_failures_carry_witness():
    four = directed_four_cycle()
    for bad in ([A(0), B(0), A(1)], [A(0), B(1), A(1), B(0)], [A(0), A(1), B(0), B(1)], [A(0), B(0), A(1), B(7)]):
        rep = is_ham_cycle(four, bad)
        assert not rep.ok and rep.witness is not None and rep.message


def test_is_ham_path_endpoints():
    g = complete_bipartite(2)
    assert is_ham_path(g, [A(0), B(0), A(1), B(1)], A(0), B(1))
    assert not is_ham_path(g, [A(0), B(0), A(1), B(1)], A(1), None)


def test_pairwise_edge_disjoint_examples():
    assert pairwise_edge_disjoint(ham_decompose_complete(5))
    cyc = shift_cycle(4, 0)
    rep = pairwise_edge_disjoint([cyc, cyc])
    assert not rep and rep.witness == (cyc[0], cyc[1])
    assert pairwise_edge_disjoint([])


def test_brute_force_examples():
    assert brute_force_max_disjoint_ham_cycles(directed_four_cycle())[0] == 1
    count, family = brute_force_max_disjoint_ham_cycles(complete_bipartite(2))
    assert count == 2 and pairwise_edge_disjoint(family)
    for seed in range(5):
        count, family = brute_force_max_disjoint_ham_cycles(diregular_tournament(4, seed))
        assert count == 2
        assert all(is_ham_cycle(diregular_tournament(4, seed), c) for c in family)


def test_oracle_caps_are_errors():
    with pytest.raises(DomainError):
        brute_force_max_disjoint_ham_cycles(complete_bipartite(7))
    with pytest.raises(DomainError):
        enumerate_ham_st_paths(complete_bipartite(8), A(0), B(0))


@pytest.mark.parametrize("seed", range(8))
def test_all_ham_cycles_matches_permutation_oracle(seed):
    rng = random.Random(seed)
    g = random_bipartite(rng, 3, 3, 0.6)
    cycles = all_ham_cycles(g)
    assert len(cycles) == len(set(cycles)) == count_ham_cycles(g)
    assert all(is_ham_cycle(g, c) for c in cycles)


def test_ham_cycle_count_of_d22():
    assert len(all_ham_cycles(complete_bipartite(2))) == count_ham_cycles(complete_bipartite(2)) == 2


def test_enumerate_examples():
    single = BipartiteDigraph(1, 1, [1], [1])
    assert enumerate_ham_st_paths(single, A(0), B(0)) == 1
    assert enumerate_ham_st_paths(complete_bipartite(2), A(0), B(1)) >= 1
    # every A0-B1 Hamilton path of D_{2,2} ends with the edge A1->B1
    sparse = remove_edges(complete_bipartite(2), [(A(1), B(1))])
    assert min_max_semidegree(sparse)[0] < 2
    assert enumerate_ham_st_paths(sparse, A(0), B(1)) == 0


@given(st.integers(0, 10 ** 6), st.integers(1, 4))
def test_enumerate_matches_permutation_oracle(seed, m):
    rng = random.Random(seed)
    g = random_bipartite(rng, m, m, 0.6)
    s, t = A(rng.randrange(m)), B(rng.randrange(m))
    assert enumerate_ham_st_paths(g, s, t) == count_ham_paths(g, s, t)


def test_enumerate_on_general_digraph():
    g = Digraph.from_edges(3, [(0, 1), (1, 2), (0, 2), (2, 1)])
    assert enumerate_ham_st_paths(g, 0, 2) == 1
    assert enumerate_ham_st_paths(g, 0, 1) == 1


def cross_pairs_ok(g):
    m = g.n_a
    return all(enumerate_ham_st_paths(g, A(x), B(y), limit=1) == 1 for x in range(m) for y in range(m))


def test_claim_exhaustive_m2():
    # m' = 2 and min semidegree >= 3/2 forces D_{2,2}
    for rows in range(1 << 8):
        g = BipartiteDigraph(2, 2, [rows & 3, rows >> 2 & 3], [rows >> 4 & 3, rows >> 6 & 3])
        if min_max_semidegree(g)[0] >= 1.5:
            assert cross_pairs_ok(g)


def test_claim_sampled_m4():
    rng = random.Random(4)
    checked = 0
    while checked < 150:
        g = random_bipartite(rng, 4, 4, 0.75)
        if min_max_semidegree(g)[0] >= 2.5:
            assert cross_pairs_ok(g)
            checked += 1


def test_claim_fails_at_m3():
    """The degree bound (m'+1)/2 does not guarantee x-y paths when m' = 3."""
    assert min_max_semidegree(COUNTEREXAMPLE)[0] == 2
    assert enumerate_ham_st_paths(COUNTEREXAMPLE, A(2), B(0)) == 0
    assert count_ham_paths(COUNTEREXAMPLE, A(2), B(0)) == 0
