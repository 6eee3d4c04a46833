"""Bipartite matching between two vertex blocks of a digraph.

A :class:`BipartiteView` is the set of edges oriented from block X to block Y,
stored as one bitset over the Y-block per X-vertex. Maximum matchings use
Hopcroft-Karp; :func:`extract_matching_collection` peels maximum matchings off
a residual view until they fall below the requested size.
"""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .digraph import BipartiteDigraph, Edge, VertexId, bits_of, iter_bits
from .errors import DomainError

UNMATCHED = -1


@dataclass(frozen=True)
class BipartiteView:
    """Edges from ``xs`` to ``ys``; ``adj[i]`` is a bitset over positions in ``ys``."""

    xs: tuple[VertexId, ...]
    ys: tuple[VertexId, ...]
    adj: tuple[int, ...]

    @classmethod
    def from_graph(cls, g: BipartiteDigraph, xs: Sequence[VertexId],
                   ys: Sequence[VertexId]) -> "BipartiteView":
        xs, ys = tuple(xs), tuple(ys)
        if xs and ys and xs[0].side == ys[0].side:
            raise DomainError("blocks must lie on opposite sides")
        pos = {v.index: k for k, v in enumerate(ys)}
        mask = bits_of(pos)
        adj = []
        for x in xs:
            row = 0
            for j in iter_bits(g.nbits(x, "out") & mask):
                row |= 1 << pos[j]
            adj.append(row)
        return cls(xs, ys, tuple(adj))

    @classmethod
    def from_pairs(cls, nx: int, ny: int, pairs: Iterable[tuple[int, int]]) -> "BipartiteView":
        """Anonymous view on A0..A(nx-1) -> B0..B(ny-1) from local index pairs."""
        from .digraph import A, B
        adj = [0] * nx
        for i, j in pairs:
            adj[i] |= 1 << j
        return cls(tuple(A(i) for i in range(nx)), tuple(B(j) for j in range(ny)), tuple(adj))

    @property
    def nx(self) -> int:
        return len(self.xs)

    @property
    def ny(self) -> int:
        return len(self.ys)

    @property
    def num_edges(self) -> int:
        return sum(r.bit_count() for r in self.adj)

    def edges(self) -> list[Edge]:
        return [(self.xs[i], self.ys[j]) for i, row in enumerate(self.adj) for j in iter_bits(row)]

    def x_degrees(self) -> list[int]:
        return [r.bit_count() for r in self.adj]

    def y_degrees(self) -> list[int]:
        deg = [0] * self.ny
        for row in self.adj:
            for j in iter_bits(row):
                deg[j] += 1
        return deg

    def degree_extremes(self) -> tuple[int, int]:
        degs = self.x_degrees() + self.y_degrees()
        return (min(degs), max(degs)) if degs else (0, 0)


@dataclass(frozen=True)
class Matching:
    """Vertex-disjoint edges, all oriented from one block to the other."""

    edges: tuple[Edge, ...]

    def __len__(self) -> int:
        return len(self.edges)

    @property
    def tails(self) -> frozenset[VertexId]:
        return frozenset(u for u, _ in self.edges)

    @property
    def heads(self) -> frozenset[VertexId]:
        return frozenset(v for _, v in self.edges)

    def is_valid(self) -> bool:
        return (len(self.tails) == len(self.edges) == len(self.heads)
                and len({(u.side, v.side) for u, v in self.edges}) <= 1)


def hopcroft_karp(adj: Sequence[int], ny: int,
                  rng: random.Random | None = None) -> tuple[list[int], list[int]]:
    """Maximum matching of a bitset bipartite graph.

    Returns ``(match_x, match_y)`` with ``UNMATCHED`` for free vertices. A
    supplied ``rng`` shuffles vertex and neighbour order, which randomizes
    which maximum matching comes out.
    """
    nx = len(adj)
    nbrs = [list(iter_bits(row)) for row in adj]
    order = list(range(nx))
    if rng is not None:
        rng.shuffle(order)
        for lst in nbrs:
            rng.shuffle(lst)
    match_x = [UNMATCHED] * nx
    match_y = [UNMATCHED] * ny
    # cheap greedy warm start
    for x in order:
        for y in nbrs[x]:
            if match_y[y] == UNMATCHED:
                match_x[x], match_y[y] = y, x
                break
    inf = nx + 1
    while True:
        dist = [inf] * nx
        queue = deque()
        for x in order:
            if match_x[x] == UNMATCHED:
                dist[x] = 0
                queue.append(x)
        found = inf
        while queue:
            x = queue.popleft()
            if dist[x] >= found:
                continue
            for y in nbrs[x]:
                x2 = match_y[y]
                if x2 == UNMATCHED:
                    found = min(found, dist[x] + 1)
                elif dist[x2] == inf:
                    dist[x2] = dist[x] + 1
                    queue.append(x2)
        if found == inf:
            break
        ptr = [0] * nx
        for root in order:
            if match_x[root] != UNMATCHED:
                continue
            # iterative layered DFS for an augmenting path from root
            stack = [root]
            path_y: list[int] = []
            while stack:
                x = stack[-1]
                advanced = False
                while ptr[x] < len(nbrs[x]):
                    y = nbrs[x][ptr[x]]
                    ptr[x] += 1
                    x2 = match_y[y]
                    if x2 == UNMATCHED:
                        if dist[x] + 1 == found:
                            path_y.append(y)
                            for xs_, ys_ in zip(stack, path_y):
                                match_x[xs_], match_y[ys_] = ys_, xs_
                            stack = []
                            advanced = True
                            break
                    elif dist[x2] == dist[x] + 1:
                        path_y.append(y)
                        stack.append(x2)
                        advanced = True
                        break
                if not advanced:
                    dist[x] = inf
                    stack.pop()
                    if path_y:
                        path_y.pop()
    return match_x, match_y


def max_matching(view: BipartiteView, rng: random.Random | None = None) -> Matching:
    match_x, _ = hopcroft_karp(view.adj, view.ny, rng)
    return Matching(tuple((view.xs[i], view.ys[j]) for i, j in enumerate(match_x) if j != UNMATCHED))


def hall_violator_indices(adj: Sequence[int], ny: int) -> set[int] | None:
    """Local X-indices of a set with fewer neighbours than members, or None if X saturates."""
    match_x, match_y = hopcroft_karp(adj, ny)
    free = [x for x, y in enumerate(match_x) if y == UNMATCHED]
    if not free:
        return None
    # alternating-path closure from one free vertex (the König frontier)
    seen_x = {free[0]}
    seen_y = 0
    queue = deque([free[0]])
    while queue:
        x = queue.popleft()
        new = adj[x] & ~seen_y
        seen_y |= new
        for y in iter_bits(new):
            x2 = match_y[y]
            if x2 == UNMATCHED:
                raise AssertionError("augmenting path survived a maximum matching")
            if x2 not in seen_x:
                seen_x.add(x2)
                queue.append(x2)
    return seen_x


def hall_violator(view: BipartiteView) -> frozenset[VertexId] | None:
    """A set X' of X-vertices with |N(X')| < |X'|, or None when Hall's condition holds."""
    found = hall_violator_indices(view.adj, view.ny)
    return None if found is None else frozenset(view.xs[i] for i in found)


@dataclass(frozen=True)
class Thresholds:
    """Slack exponents: with block size m, slack is m**exp; ``None`` means zero slack.

    Defaults are the asymptotic values of the imported matching lemma.
    """

    count: float | None = 24 / 25
    size: float | None = 7 / 8
    degree: float | None = 5 / 6
    window: float | None = 2 / 3

    @staticmethod
    def slack(base: float, exp: float | None) -> float:
        return 0.0 if exp is None or base <= 0 else base ** exp


EXACT = Thresholds(None, None, None, None)


@dataclass
class MatchingCollection:
    matchings: list[Matching]
    usage: dict[VertexId, int]
    targets: dict[str, float]
    degraded: bool = False
    diagnostic: str = ""
    auxiliary: VertexId | None = None
    achieved: dict[str, float] = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.matchings)

    def union_min_degree(self) -> int:
        return min(self.usage.values(), default=0)


def check_degree_window(view: BipartiteView, r: float, thresholds: Thresholds) -> None:
    upper = r + Thresholds.slack(r, thresholds.window)
    for v, d in zip(view.xs + view.ys, view.x_degrees() + view.y_degrees()):
        if d < r or d > upper:
            raise DomainError(f"vertex {v} has degree {d} outside [{r}, {upper:.3f}]")


def extract_matching_collection(view: BipartiteView, r: float, m: int | None = None,
                                thresholds: Thresholds = Thresholds(),
                                check_window: bool = True,
                                rng: random.Random | None = None) -> MatchingCollection:
    """Edge-disjoint large matchings of ``view``, peeled greedily.

    Targets: at least ``r - slack_count`` matchings, each of size at least
    ``m - slack_size``, with every vertex in at least
    ``r - slack_count - 2 slack_degree`` of them. A shortfall is reported via
    ``degraded`` rather than raised. When one block is larger by exactly one,
    an auxiliary vertex joined to the lowest-index min-degree-many vertices of
    the larger block balances the view; its edges never appear in the output.
    """
    if check_window:
        check_degree_window(view, r, thresholds)
    nx, ny = view.nx, view.ny
    if m is None:
        m = max(nx, ny)
    adj = list(view.adj)
    aux = None
    min_deg = view.degree_extremes()[0]
    if nx == ny + 1:
        # extra Y position ny, adjacent to X positions 0..min_deg-1
        for i in range(min(min_deg, nx)):
            adj[i] |= 1 << ny
        ny_eff, aux = ny + 1, "y"
    elif ny == nx + 1:
        adj.append(bits_of(range(min(min_deg, ny))))
        ny_eff, aux = ny, "x"
    else:
        ny_eff = ny

    count_target = r - Thresholds.slack(m, thresholds.count)
    size_target = m - Thresholds.slack(m, thresholds.size)
    degree_target = count_target - 2 * Thresholds.slack(m, thresholds.degree)

    matchings: list[Matching] = []
    usage = {v: 0 for v in view.xs + view.ys}
    while True:
        match_x, _ = hopcroft_karp(adj, ny_eff, rng)
        matched = [(i, j) for i, j in enumerate(match_x) if j != UNMATCHED]
        # the auxiliary edge counts toward the size, as in the balanced view
        real = [(i, j) for i, j in matched
                if not ((aux == "y" and j == ny) or (aux == "x" and i == nx))]
        if not real or len(matched) < size_target:
            break
        for i, j in enumerate(match_x):
            if j != UNMATCHED:
                adj[i] &= ~(1 << j)
        edges = tuple((view.xs[i], view.ys[j]) for i, j in real)
        for u, v in edges:
            usage[u] += 1
            usage[v] += 1
        matchings.append(Matching(edges))

    achieved = {"count": len(matchings),
                "min_size": min((len(mt) for mt in matchings), default=0),
                "union_min_degree": min(usage.values(), default=0)}
    problems = []
    if achieved["count"] < count_target:
        problems.append(f"{achieved['count']} matchings < target {count_target:.2f}")
    if achieved["union_min_degree"] < degree_target:
        problems.append(f"union min degree {achieved['union_min_degree']} < target {degree_target:.2f}")
    aux_label = None
    if aux == "y":
        aux_label = VertexId(view.ys[0].side, -1) if view.ys else None
    elif aux == "x":
        aux_label = VertexId(view.xs[0].side, -1) if view.xs else None
    return MatchingCollection(
        matchings, usage,
        targets={"count": count_target, "size": size_target, "union_min_degree": degree_target},
        degraded=bool(problems), diagnostic="; ".join(problems),
        auxiliary=aux_label, achieved=achieved)
