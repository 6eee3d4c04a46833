"""Input families and the exact Hamilton decomposition of D_{n,n}."""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from .digraph import BipartiteDigraph, Side, VertexId
from .errors import ConstructionFailure, DomainError

HamCycle = tuple[VertexId, ...]
HamPath = tuple[VertexId, ...]


def rng_for(seed, *tags) -> random.Random:
    """Independent, reproducible stream for ``seed`` and a stage label.

    String seeds are hashed with SHA-512 by :class:`random.Random`, so the
    stream does not depend on ``PYTHONHASHSEED``.
    """
    return random.Random(":".join(str(x) for x in (seed, *tags)))


def complete_bipartite(n: int) -> BipartiteDigraph:
    if n < 1:
        raise DomainError("n must be at least 1")
    full = (1 << n) - 1
    return BipartiteDigraph(n, n, [full] * n, [full] * n)


def directed_four_cycle() -> BipartiteDigraph:
    """a0 -> b0 -> a1 -> b1 -> a0."""
    a0, a1 = VertexId(Side.A, 0), VertexId(Side.A, 1)
    b0, b1 = VertexId(Side.B, 0), VertexId(Side.B, 1)
    return BipartiteDigraph.from_edges(2, 2, [(a0, b0), (b0, a1), (a1, b1), (b1, a0)])


def diregular_tournament(n: int, seed=0) -> BipartiteDigraph:
    """Orient K_{n,n} along a randomized Eulerian circuit.

    Every vertex of K_{n,n} has even degree n, so walking an Eulerian circuit
    and orienting each edge in the walking direction gives in = out = n/2 at
    every vertex with no rejection step.
    """
    if n < 2 or n % 2:
        raise DomainError(f"diregular bipartite tournaments need even n >= 2, got {n}")
    rng = rng_for(seed, "tournament", n)
    # vertices 0..n-1 are A, n..2n-1 are B; unused[v] lists remaining partners
    unused: list[list[int]] = []
    for v in range(2 * n):
        partners = list(range(n, 2 * n)) if v < n else list(range(n))
        rng.shuffle(partners)
        unused.append(partners)
    removed = [set() for _ in range(2 * n)]
    start = rng.randrange(2 * n)
    stack, circuit = [start], []
    while stack:
        v = stack[-1]
        nbrs = unused[v]
        while nbrs and nbrs[-1] in removed[v]:
            nbrs.pop()
        if nbrs:
            w = nbrs.pop()
            removed[w].add(v)
            stack.append(w)
        else:
            circuit.append(stack.pop())
    circuit.reverse()
    out_a = [0] * n
    out_b = [0] * n
    for u, v in zip(circuit, circuit[1:]):
        if u < n:
            out_a[u] |= 1 << (v - n)
        else:
            out_b[u - n] |= 1 << v
    g = BipartiteDigraph(n, n, out_a, out_b)
    if g.num_edges != n * n or g.regular_degree() != n // 2:
        raise AssertionError("Eulerian orientation lost an edge")
    return g


def random_latin_square(n: int, rng: random.Random) -> list[list[int]]:
    """Cyclic square with rows, columns and symbols independently permuted."""
    rows = list(range(n))
    cols = list(range(n))
    syms = list(range(n))
    rng.shuffle(rows)
    rng.shuffle(cols)
    rng.shuffle(syms)
    return [[syms[(rows[r] + cols[c]) % n] for c in range(n)] for r in range(n)]


def random_regular_bipartite_digraph(n: int, d: int, seed=0) -> BipartiteDigraph:
    """d-regular balanced bipartite digraph from the first d rows of two Latin squares.

    Row r, column i of the first square gives the edge a_i -> b_{L[r][i]};
    the second (independent) square gives the B->A edges the same way. The
    result is exactly d-regular but not uniform over all such digraphs.
    """
    if n < 1:
        raise DomainError("n must be at least 1")
    if not 1 <= d <= n:
        raise DomainError(f"need 1 <= d <= n, got d={d}, n={n}")
    rng = rng_for(seed, "regular", n, d)
    tables = []
    for _ in range(2):
        square = random_latin_square(n, rng)
        rows = [0] * n
        for r in range(d):
            for i, j in enumerate(square[r]):
                rows[i] |= 1 << j
        tables.append(rows)
    return BipartiteDigraph(n, n, tables[0], tables[1])


def side_vertices(side: Side, n: int) -> list[VertexId]:
    return [VertexId(side, i) for i in range(n)]


def _interleave(first: list[VertexId], second: list[VertexId]) -> tuple[VertexId, ...]:
    seq: list = [None] * (len(first) + len(second))
    seq[0::2] = first
    seq[1::2] = second
    return tuple(seq)


def _rotated(vs: list[VertexId], k: int) -> list[VertexId]:
    k %= len(vs)
    return vs[k:] + vs[:k]


def shift_cycle(n: int, k: int, _a=None, _b=None) -> HamCycle:
    """The k-th cycle a_0, b_k, a_1, b_{k+1}, ..., a_{n-1}, b_{k+n-1} (indices mod n)."""
    a = _a or side_vertices(Side.A, n)
    b = _b or side_vertices(Side.B, n)
    return _interleave(a, _rotated(b, k))


def ham_decompose_complete(n: int) -> list[HamCycle]:
    """Partition E(D_{n,n}) into n Hamilton cycles via the shift family.

    Cycle k owns the A->B edges (a_i, b_{i+k}) and the B->A edges
    (b_{i+k}, a_{i+1}); both are bijections between edges and shift values.
    """
    if n < 1:
        raise DomainError("n must be at least 1")
    a, b = side_vertices(Side.A, n), side_vertices(Side.B, n)
    return [shift_cycle(n, k, a, b) for k in range(n)]


def endpoint_bound(n: int) -> int:
    """Largest allowed endpoint multiplicity, floor(2 sqrt(ln n)).

    For n = 2 the formula gives 1, which no family of two paths can meet
    (see ``ham_paths_complete``), so the bound is clamped to at least 2.
    """
    return max(2, math.floor(2 * math.sqrt(math.log(n))))


@dataclass
class PathFamily:
    paths: list[HamPath]
    max_multiplicity: int
    bound: int
    attempts: int


def ham_paths_complete(n: int, seed=0, retry_budget: int = 1000,
                       start_side: Side = Side.B) -> PathFamily:
    """n edge-disjoint Hamilton paths of D_{n,n}, all starting on ``start_side``.

    One uniformly random A->B edge is deleted from each shift cycle; the whole
    choice is resampled until no vertex is the endpoint of more than
    :func:`endpoint_bound` paths. With ``start_side=Side.A`` the construction
    is mirrored (A and B swapped), which is an automorphism of D_{n,n}.
    """
    if n < 2:
        raise DomainError("need n >= 2")
    if retry_budget < 1:
        raise DomainError("retry_budget must be positive")
    rng = rng_for(seed, "hampaths", n)
    bound = endpoint_bound(n)
    best = None
    for attempt in range(1, retry_budget + 1):
        cut = [rng.randrange(n) for _ in range(n)]
        starts = [0] * n
        ends = [0] * n
        for k, i in enumerate(cut):
            starts[(i + k) % n] += 1
            ends[i] += 1
        mult = max(max(starts), max(ends))
        if best is None or mult < best[0]:
            best = (mult, cut)
        if mult <= bound:
            break
    else:
        raise ConstructionFailure(
            f"no path family within endpoint bound {bound} after {retry_budget} attempts",
            {"n": n, "bound": bound, "best_multiplicity": best[0], "attempts": retry_budget})
    starts_cls = side_vertices(start_side, n)
    other_cls = side_vertices(start_side.other, n)
    # cycle k minus (a_i, b_{i+k}) runs b_{i+k} -> a_{i+1} -> ... -> a_i; with
    # start_side A the sides are swapped, an automorphism of D_{n,n}
    paths = [_interleave(_rotated(starts_cls, i + k), _rotated(other_cls, i + 1))
             for k, i in enumerate(cut)]
    return PathFamily(paths, mult, bound, attempt)
