"""Constructive Hamilton cycles and s-t Hamilton paths.

``ghouila_houri_cycle`` grows a cycle by insertion and detour moves and falls
back to a bounded exhaustive search when the local moves stall.
``ham_st_path_cross`` reduces a Hamilton x-y path in a balanced bipartite
digraph to a Hamilton cycle of an auxiliary digraph built on a perfect
matching; ``ham_st_path`` adds the same-side endpoint case.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass
from typing import Literal

from .digraph import BipartiteDigraph, Digraph, Side, VertexId, induced, iter_bits, min_max_semidegree
from .errors import ConstructionFailure, DomainError, InvariantViolation
from .matchings import BipartiteView, hopcroft_karp, UNMATCHED
from .verify import is_ham_cycle, is_ham_path

DegreeCheck = Literal["lemma", "claim", "off"]

DEFAULT_SEARCH_BUDGET = 200_000


# -- exact search ----------------------------------------------------------------

def search_ham_path_flat(g: Digraph, s: int, t: int | None,
                         budget: int = DEFAULT_SEARCH_BUDGET) -> list[int] | None:
    """Backtracking search for a Hamilton path from ``s`` (to ``t`` if given).

    Returns None when no path exists or the node budget runs out; the caller
    cannot tell the two apart, which is why this is only a fallback.
    """
    n = g.n
    if n == 1:
        return [s] if t in (None, s) else None
    full = (1 << n) - 1
    succ, pred = g.succ, g.pred
    path = [s]
    nodes = 0

    def viable(cur: int, free: int) -> bool:
        for v in iter_bits(free):
            if not pred[v] & (free | 1 << cur):
                return False
            if v != t and not succ[v] & free:
                return False
        return True

    def extend(cur: int, free: int) -> bool:
        nonlocal nodes
        if not free:
            return t is None or cur == t
        nodes += 1
        if nodes > budget:
            return False
        options = succ[cur] & free
        if t is not None and free != 1 << t:
            options &= ~(1 << t)
        # Warnsdorff order: tightest continuation first
        cand = sorted(iter_bits(options), key=lambda w: (succ[w] & free).bit_count())
        for w in cand:
            nfree = free & ~(1 << w)
            if nfree and not viable(w, nfree):
                continue
            path.append(w)
            if extend(w, nfree):
                return True
            path.pop()
            if nodes > budget:
                return False
        return False

    if extend(s, full & ~(1 << s)):
        return path
    return None


def search_ham_cycle_flat(g: Digraph, budget: int = DEFAULT_SEARCH_BUDGET) -> list[int] | None:
    if g.n < 2:
        return None
    # a Hamilton path 0 -> p where p -> 0 closes the cycle; try each predecessor of 0
    for end in sorted(iter_bits(g.pred[0]), key=lambda v: g.succ[v].bit_count()):
        path = search_ham_path_flat(g, 0, end, budget)
        if path is not None:
            return path
    return None


# -- Ghouila-Houri -------------------------------------------------------------------

def _initial_cycle(g: Digraph, start: int) -> list[int]:
    """Shortest cycle through ``start`` (exists in a strongly connected digraph)."""
    parent = {}
    queue = deque()
    for w in iter_bits(g.succ[start]):
        parent[w] = start
        queue.append(w)
    while queue:
        u = queue.popleft()
        if g.succ[u] >> start & 1:
            seq = [u]
            while seq[-1] != start:
                seq.append(parent[seq[-1]])
            seq.reverse()
            return seq
        for w in iter_bits(g.succ[u]):
            if w != start and w not in parent:
                parent[w] = u
                queue.append(w)
    raise InvariantViolation(f"no cycle through {start} in a strongly connected digraph")


def _improve(g: Digraph, cyc: list[int]) -> list[int] | None:
    """One strictly improving move, or None if none of the moves applies."""
    k = len(cyc)
    in_cyc = 0
    for v in cyc:
        in_cyc |= 1 << v
    outside = ((1 << g.n) - 1) & ~in_cyc
    succ, pred = g.succ, g.pred
    # insertion between consecutive cycle vertices
    for i in range(k):
        cand = succ[cyc[i]] & pred[cyc[(i + 1) % k]] & outside
        if cand:
            v = (cand & -cand).bit_length() - 1
            return cyc[:i + 1] + [v] + cyc[i + 1:]
    pos = {v: i for i, v in enumerate(cyc)}
    # detour: c_i -> (path outside the cycle) -> c_j, dropping the vertices strictly between
    best = None
    for i in range(k):
        start = succ[cyc[i]] & outside
        if not start:
            continue
        parent = {}
        depth = {}
        frontier = []
        for w in iter_bits(start):
            parent[w] = None
            depth[w] = 1
            frontier.append(w)
        queue = deque(frontier)
        while queue:
            u = queue.popleft()
            for cj in iter_bits(succ[u] & in_cyc):
                j = pos[cj]
                gap = (j - i - 1) % k
                gain = depth[u] - gap
                if gain > 0 and (best is None or gain > best[0]):
                    best = (gain, i, j, u, parent)
            for w in iter_bits(succ[u] & outside):
                if w not in parent:
                    parent[w] = u
                    depth[w] = depth[u] + 1
                    queue.append(w)
        if best is not None:
            break
    if best is not None:
        _, i, j, u, parent = best
        detour = [u]
        while parent[detour[-1]] is not None:
            detour.append(parent[detour[-1]])
        detour.reverse()
        kept = [cyc[(j + s) % k] for s in range((i - j) % k + 1)]  # c_j ... c_i
        return kept + detour
    # exchange: outside v replaces c_j, then c_j is re-inserted somewhere
    for v in iter_bits(outside):
        for j in range(k):
            if succ[cyc[j - 1]] >> v & 1 and pred[cyc[(j + 1) % k]] >> v & 1:
                cj = cyc[j]
                trial = cyc[:j] + [v] + cyc[j + 1:]
                for p in range(k):
                    a, b = trial[p], trial[(p + 1) % k]
                    if succ[a] >> cj & 1 and pred[b] >> cj & 1:
                        return trial[:p + 1] + [cj] + trial[p + 1:]
    return None


def _grow_cycle(g: Digraph, rng: random.Random) -> list[int] | None:
    cyc = _initial_cycle(g, rng.randrange(g.n))
    while len(cyc) < g.n:
        nxt = _improve(g, cyc)
        if nxt is None:
            return None
        if len(nxt) <= len(cyc):
            raise InvariantViolation("cycle improvement did not grow the cycle")
        cyc = nxt
    return cyc


def check_ghouila_houri(g: Digraph) -> None:
    if g.n < 2:
        raise DomainError("a Hamilton cycle needs at least two vertices")
    total = g.min_out() + g.min_in()
    if total < g.n:
        raise DomainError(f"min out-degree + min in-degree = {total} < {g.n}")
    if not g.strongly_connected():
        raise DomainError("digraph is not strongly connected")


def ghouila_houri_cycle(g: Digraph, rng: random.Random | None = None, restarts: int = 8,
                        search_budget: int = DEFAULT_SEARCH_BUDGET,
                        check: bool = True) -> list[int]:
    """Hamilton cycle of a strongly connected digraph with min out + min in >= n.

    ``check=False`` skips the precondition so the routine can be tried on
    digraphs that merely look dense; failure then raises ConstructionFailure
    instead of InvariantViolation.
    """
    if check:
        check_ghouila_houri(g)
    elif g.n < 2:
        raise ConstructionFailure("a Hamilton cycle needs at least two vertices")
    rng = rng or random.Random(0)
    cyc = None
    for _ in range(max(1, restarts)):
        try:
            cyc = _grow_cycle(g, rng)
        except InvariantViolation:
            if check:
                raise
            cyc = None
        if cyc is not None:
            break
    if cyc is None:
        cyc = search_ham_cycle_flat(g, search_budget)
    if cyc is None:
        if check:
            raise InvariantViolation("no Hamilton cycle found although the degree condition holds")
        raise ConstructionFailure("no Hamilton cycle found")
    if not is_ham_cycle(g, cyc):
        raise InvariantViolation("constructed sequence is not a Hamilton cycle")
    return cyc


# -- Hamilton s-t paths in balanced bipartite digraphs ------------------------------

@dataclass(frozen=True)
class AuxDigraph:
    """z_i -> z_j iff w_i -> v_j in the source graph (i != j)."""

    w: tuple[VertexId, ...]
    v: tuple[VertexId, ...]
    digraph: Digraph

    @classmethod
    def build(cls, f: BipartiteDigraph, w, v) -> "AuxDigraph":
        size = len(w)
        if len(v) != size:
            raise DomainError("vertex lists must have equal length")
        succ = []
        for i in range(size):
            row = 0
            out = f.nbits(w[i], "out")
            for j in range(size):
                if i != j and out >> v[j].index & 1:
                    row |= 1 << j
            succ.append(row)
        aux = cls(tuple(w), tuple(v), Digraph(size, succ))
        for i in range(size):
            for j in range(size):
                if i != j and aux.digraph.has_edge(i, j) != f.has_edge(w[i], v[j]):
                    raise InvariantViolation("auxiliary edge rule broken")
        return aux

    def expand(self, cycle: list[int]) -> list[VertexId]:
        """Turn a Hamilton cycle of the auxiliary digraph into the x..y path."""
        last = len(self.w) - 1
        r = cycle.index(last)
        order = cycle[r:] + cycle[:r]
        seq = [self.w[last]]
        for j in order[1:]:
            seq.append(self.v[j])
            seq.append(self.w[j])
        seq.append(self.v[last])
        return seq


def _sides(f: BipartiteDigraph, side: Side) -> list[VertexId]:
    return [VertexId(side, i) for i in range(f.side_size(side))]


def ham_st_path_cross(f: BipartiteDigraph, x: VertexId, y: VertexId,
                      check: bool = True, rng: random.Random | None = None,
                      trace: dict | None = None) -> list[VertexId]:
    """Hamilton path from ``x`` to ``y`` (opposite sides) of a balanced bipartite digraph.

    Requires min semidegree >= (m'+1)/2 with m' the side size. The perfect
    matching of B-{y} -> A-{x} edges exists by Hall's theorem; the auxiliary
    digraph on the matched pairs is then made Hamiltonian and expanded.
    """
    if not f.balanced():
        raise DomainError("ham_st_path_cross needs a balanced digraph")
    if x.side == y.side:
        raise DomainError("x and y must lie on opposite sides")
    if not f.contains(x) or not f.contains(y):
        raise DomainError("endpoints outside the graph")
    mp = f.n_a
    delta = min_max_semidegree(f)[0]
    if check and delta < (mp + 1) / 2:
        raise DomainError(f"min semidegree {delta} < (m'+1)/2 = {(mp + 1) / 2}")
    failure = InvariantViolation if check else ConstructionFailure
    rng = rng or random.Random(0)
    if trace is not None:
        trace.setdefault("route", [])
    if mp == 1:
        if not f.has_edge(x, y):
            raise failure(f"missing edge {x}->{y}")
        return [x, y]

    xs_side, ys_side = x.side, y.side
    rest_x = [u for u in _sides(f, xs_side) if u != x]   # the w's
    rest_y = [u for u in _sides(f, ys_side) if u != y]   # the v's
    view = BipartiteView.from_graph(f, rest_y, rest_x)   # edges v -> w
    attempts = 4 if check else 8
    for attempt in range(attempts):
        match_x, _ = hopcroft_karp(view.adj, view.ny, rng if attempt else None)
        if UNMATCHED in match_x:
            raise failure("no perfect matching between Y-{y} and X-{x}")
        v_list = list(rest_y) + [y]
        w_list = [rest_x[match_x[i]] for i in range(len(rest_y))] + [x]
        aux = AuxDigraph.build(f, w_list, v_list)
        h = aux.digraph
        cyc = None
        try:
            check_ghouila_houri(h)
            cyc = ghouila_houri_cycle(h, rng, check=False)
            route = "ghouila-houri"
        except (DomainError, ConstructionFailure):
            cyc = search_ham_cycle_flat(h) if h.n >= 2 else None
            route = "aux-search"
        if cyc is not None:
            path = aux.expand(cyc)
            rep = is_ham_path(f, path, x, y)
            if not rep:
                raise InvariantViolation(f"expanded path invalid: {rep.message}")
            if trace is not None:
                trace["route"].append(route)
            return path
    # the matching choices all gave non-Hamiltonian auxiliary digraphs
    flat = f.to_digraph()
    found = search_ham_path_flat(flat, f.flat_index(x), f.flat_index(y))
    if found is None:
        # reachable under the (m'+1)/2 bound: it does not guarantee a path when m' = 3
        raise ConstructionFailure(f"no Hamilton path {x}->{y} found",
                                  {"m_prime": mp, "min_semidegree": delta})
    if trace is not None:
        trace["route"].append("direct-search")
    return [f.from_flat(k) for k in found]


def ham_st_path(f: BipartiteDigraph, s: VertexId, t: VertexId,
                degree_check: DegreeCheck = "lemma", rng: random.Random | None = None,
                trace: dict | None = None) -> list[VertexId]:
    """Hamilton s-t path under the balance rule for the endpoint sides.

    Opposite sides need |A| = |B|; both on one side need that side larger by
    one. ``degree_check="lemma"`` enforces min semidegree >= (m'+3)/2 with
    m' = min(|A|, |B|); ``"claim"`` only enforces the weaker bound inside the
    cross-side sub-call; ``"off"`` enforces nothing and lets the cross-side
    routine fall back to search.
    """
    if s == t:
        raise DomainError("s and t must differ")
    if not f.contains(s) or not f.contains(t):
        raise DomainError("endpoints outside the graph")
    mp = min(f.n_a, f.n_b)
    if s.side != t.side:
        if not f.balanced():
            raise DomainError("cross-side endpoints need |A| = |B|")
    else:
        big = s.side
        if f.side_size(big) != f.side_size(big.other) + 1:
            raise DomainError(f"both endpoints on {big.name} need |{big.name}| = |{big.other.name}| + 1")
    if degree_check == "lemma":
        delta = min_max_semidegree(f)[0]
        if delta < (mp + 3) / 2:
            raise DomainError(f"min semidegree {delta} < (m'+3)/2 = {(mp + 3) / 2}")
    inner_check = degree_check != "off"
    if s.side != t.side:
        return ham_st_path_cross(f, s, t, check=inner_check, rng=rng, trace=trace)

    sub = induced(f, [v for v in f.vertices() if v != s])
    local_t = _localize(sub, t)
    tried = []
    for u in f.out_neighbours(s):
        try:
            path = ham_st_path_cross(sub.graph, _localize(sub, u), local_t,
                                     check=inner_check, rng=rng, trace=trace)
        except (DomainError, ConstructionFailure, InvariantViolation) as exc:
            tried.append((str(u), str(exc)))
            continue
        return [s] + [sub.lift(v) for v in path]
    raise ConstructionFailure(f"no out-neighbour of {s} extends to a Hamilton path to {t}",
                              {"tried": tried})


def _localize(sub, v: VertexId) -> VertexId:
    labels = sub.a_labels if v.side is Side.A else sub.b_labels
    return VertexId(v.side, labels.index(v.index))


def lemma_degree_bound(f: BipartiteDigraph) -> float:
    return (min(f.n_a, f.n_b) + 3) / 2


def claim_degree_bound(m_prime: int) -> float:
    return (m_prime + 1) / 2


def search_ham_st_path(f: BipartiteDigraph, s: VertexId, t: VertexId,
                       budget: int = DEFAULT_SEARCH_BUDGET) -> list[VertexId] | None:
    """Budgeted exhaustive fallback for parts too small for the degree conditions."""
    flat = f.to_digraph()
    found = search_ham_path_flat(flat, f.flat_index(s), f.flat_index(t), budget)
    return None if found is None else [f.from_flat(k) for k in found]


__all__ = [
    "AuxDigraph", "ghouila_houri_cycle", "ham_st_path", "ham_st_path_cross",
    "search_ham_st_path", "search_ham_cycle_flat", "search_ham_path_flat",
    "check_ghouila_houri", "lemma_degree_bound", "claim_degree_bound",
]
