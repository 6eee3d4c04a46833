"""Bipartite digraphs stored as per-vertex bitsets.

Every vertex is a :class:`VertexId` carrying its side, so an A-index can never
be confused with a B-index. Adjacency is kept in four bitset tables: A->B and
B->A out-neighbourhoods plus the two mirrored in-neighbourhood tables. Python
ints serve as arbitrary-width bitsets; ``int.bit_count`` gives popcounts.

Graphs are immutable. :func:`remove_edges`, :func:`add_edges` and
:func:`induced` return fresh objects.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import IntEnum
from pathlib import Path
from typing import Iterable, Iterator, Literal, NamedTuple, Sequence

from .errors import DomainError

Direction = Literal["out", "in"]


class Side(IntEnum):
    A = 0
    B = 1

    # Enum.__hash__ is Python-level; vertices are hashed constantly
    __hash__ = int.__hash__

    @property
    def other(self) -> "Side":
        return Side.B if self is Side.A else Side.A


class VertexId(NamedTuple):
    side: Side
    index: int

    def __str__(self) -> str:
        return f"{self.side.name}{self.index}"

    def __repr__(self) -> str:
        return str(self)

    @classmethod
    def parse(cls, token: str) -> "VertexId":
        m = _TOKEN.fullmatch(token.strip())
        if not m:
            raise DomainError(f"bad vertex token {token!r}")
        return cls(Side[m.group(1)], int(m.group(2)))


_TOKEN = re.compile(r"([AB])(\d+)")

Edge = tuple[VertexId, VertexId]


def A(i: int) -> VertexId:
    return VertexId(Side.A, i)


def B(i: int) -> VertexId:
    return VertexId(Side.B, i)


def iter_bits(x: int) -> Iterator[int]:
    """Indices of the set bits of ``x`` in increasing order."""
    while x:
        low = x & -x
        yield low.bit_length() - 1
        x ^= low


def bits_of(indices: Iterable[int]) -> int:
    x = 0
    for i in indices:
        x |= 1 << i
    return x


def _transpose(rows: Sequence[int], width: int) -> tuple[int, ...]:
    cols = [0] * width
    for i, row in enumerate(rows):
        bit = 1 << i
        for j in iter_bits(row):
            cols[j] |= bit
    return tuple(cols)


class BipartiteDigraph:
    """Loopless digraph whose edges all cross between classes A and B.

    ``out_a[i]`` is the bitset of B-indices ``j`` with an edge ``A i -> B j``;
    ``out_b[j]`` is the bitset of A-indices with an edge ``B j -> A i``.
    ``in_a`` / ``in_b`` are the transposes, kept so in-degree queries cost the
    same as out-degree ones.
    """

    __slots__ = ("n_a", "n_b", "out_a", "out_b", "in_a", "in_b", "_m")

    def __init__(self, n_a: int, n_b: int, out_a: Sequence[int] | None = None,
                 out_b: Sequence[int] | None = None):
        if n_a < 0 or n_b < 0:
            raise DomainError("side sizes must be non-negative")
        out_a = tuple(out_a) if out_a is not None else (0,) * n_a
        out_b = tuple(out_b) if out_b is not None else (0,) * n_b
        if len(out_a) != n_a or len(out_b) != n_b:
            raise DomainError("adjacency tables do not match side sizes")
        full_b, full_a = (1 << n_b) - 1, (1 << n_a) - 1
        if any(row & ~full_b for row in out_a) or any(row & ~full_a for row in out_b):
            raise DomainError("adjacency refers to a vertex outside its side")
        self.n_a = n_a
        self.n_b = n_b
        self.out_a = out_a
        self.out_b = out_b
        self.in_b = _transpose(out_a, n_b)
        self.in_a = _transpose(out_b, n_a)
        self._m = sum(r.bit_count() for r in out_a) + sum(r.bit_count() for r in out_b)

    @classmethod
    def from_edges(cls, n_a: int, n_b: int, edges: Iterable[Edge],
                   reject_duplicates: bool = False) -> "BipartiteDigraph":
        out_a = [0] * n_a
        out_b = [0] * n_b
        for u, v in edges:
            _check_vertex(n_a, n_b, u)
            _check_vertex(n_a, n_b, v)
            if u.side == v.side:
                raise DomainError(f"edge {u}->{v} lies inside one side")
            table = out_a if u.side is Side.A else out_b
            bit = 1 << v.index
            if table[u.index] & bit and reject_duplicates:
                raise DomainError(f"duplicate edge {u}->{v}")
            table[u.index] |= bit
        return cls(n_a, n_b, out_a, out_b)

    # -- queries -----------------------------------------------------------

    def __len__(self) -> int:
        return self.n_a + self.n_b

    @property
    def num_edges(self) -> int:
        return self._m

    def balanced(self) -> bool:
        return self.n_a == self.n_b

    def side_size(self, side: Side) -> int:
        return self.n_a if side is Side.A else self.n_b

    def vertices(self) -> Iterator[VertexId]:
        for i in range(self.n_a):
            yield VertexId(Side.A, i)
        for j in range(self.n_b):
            yield VertexId(Side.B, j)

    def contains(self, v: VertexId) -> bool:
        return 0 <= v.index < self.side_size(v.side)

    def nbits(self, v: VertexId, direction: Direction = "out") -> int:
        """Bitset (over the opposite side) of the out- or in-neighbours of ``v``."""
        _check_vertex(self.n_a, self.n_b, v)
        if direction == "out":
            return self.out_a[v.index] if v.side is Side.A else self.out_b[v.index]
        if direction == "in":
            return self.in_a[v.index] if v.side is Side.A else self.in_b[v.index]
        raise DomainError(f"direction must be 'out' or 'in', got {direction!r}")

    def out_neighbours(self, v: VertexId) -> list[VertexId]:
        side = v.side.other
        return [VertexId(side, j) for j in iter_bits(self.nbits(v, "out"))]

    def in_neighbours(self, v: VertexId) -> list[VertexId]:
        side = v.side.other
        return [VertexId(side, j) for j in iter_bits(self.nbits(v, "in"))]

    def has_edge(self, u: VertexId, v: VertexId) -> bool:
        if u.side == v.side or not self.contains(u) or not self.contains(v):
            return False
        row = self.out_a[u.index] if u.side is Side.A else self.out_b[u.index]
        return bool(row >> v.index & 1)

    def edges(self) -> Iterator[Edge]:
        for i, row in enumerate(self.out_a):
            for j in iter_bits(row):
                yield VertexId(Side.A, i), VertexId(Side.B, j)
        for j, row in enumerate(self.out_b):
            for i in iter_bits(row):
                yield VertexId(Side.B, j), VertexId(Side.A, i)

    def edge_set(self) -> frozenset[Edge]:
        return frozenset(self.edges())

    def degree_sequence(self) -> list[tuple[int, int]]:
        """(out, in) for every vertex, A-side first."""
        seq = [(self.out_a[i].bit_count(), self.in_a[i].bit_count()) for i in range(self.n_a)]
        seq += [(self.out_b[j].bit_count(), self.in_b[j].bit_count()) for j in range(self.n_b)]
        return seq

    def regular_degree(self) -> int | None:
        """The common semidegree if every in- and out-degree agree, else None."""
        seq = self.degree_sequence()
        if not seq:
            return 0
        d = seq[0][0]
        return d if all(o == d and i == d for o, i in seq) else None

    def to_digraph(self) -> "Digraph":
        """Flatten to a plain :class:`Digraph`: A i -> i, B j -> n_a + j."""
        succ = [row << self.n_a for row in self.out_a] + list(self.out_b)
        return Digraph(self.n_a + self.n_b, succ)

    def flat_index(self, v: VertexId) -> int:
        return v.index if v.side is Side.A else self.n_a + v.index

    def from_flat(self, k: int) -> VertexId:
        return VertexId(Side.A, k) if k < self.n_a else VertexId(Side.B, k - self.n_a)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, BipartiteDigraph):
            return NotImplemented
        return (self.n_a, self.n_b, self.out_a, self.out_b) == (
            other.n_a, other.n_b, other.out_a, other.out_b)

    def __hash__(self) -> int:
        return hash((self.n_a, self.n_b, self.out_a, self.out_b))

    def __repr__(self) -> str:
        return f"BipartiteDigraph(n_a={self.n_a}, n_b={self.n_b}, edges={self._m})"


def _check_vertex(n_a: int, n_b: int, v: VertexId) -> None:
    size = n_a if v.side is Side.A else n_b
    if not 0 <= v.index < size:
        raise DomainError(f"vertex {v} outside side of size {size}")


def degree(g: BipartiteDigraph, v: VertexId, direction: Direction = "out",
           restrict: Iterable[VertexId] | None = None) -> int:
    """|N^dir(v) ∩ restrict|, with ``restrict`` defaulting to the whole opposite side."""
    row = g.nbits(v, direction)
    if restrict is None:
        return row.bit_count()
    mask = 0
    for w in restrict:
        if w.side == v.side:
            raise DomainError(f"restrict set contains {w}, on the same side as {v}")
        mask |= 1 << w.index
    return (row & mask).bit_count()


def min_max_semidegree(g: BipartiteDigraph) -> tuple[int, int]:
    seq = g.degree_sequence()
    if not seq:
        return 0, 0
    return min(min(p) for p in seq), max(max(p) for p in seq)


@dataclass(frozen=True)
class Induced:
    """An induced subgraph together with the map back to its parent's labels."""

    graph: BipartiteDigraph
    a_labels: tuple[int, ...]
    b_labels: tuple[int, ...]

    def lift(self, v: VertexId) -> VertexId:
        labels = self.a_labels if v.side is Side.A else self.b_labels
        return VertexId(v.side, labels[v.index])

    def lift_edge(self, e: Edge) -> Edge:
        return self.lift(e[0]), self.lift(e[1])

    def lift_edges(self) -> Iterator[Edge]:
        for e in self.graph.edges():
            yield self.lift_edge(e)


def _compress(row: int, positions: dict[int, int]) -> int:
    out = 0
    for j in iter_bits(row):
        k = positions.get(j)
        if k is not None:
            out |= 1 << k
    return out


def induced(g: BipartiteDigraph, vertices: Iterable[VertexId]) -> Induced:
    """G[S], re-indexed from 0 on each side in increasing parent order."""
    sa: set[int] = set()
    sb: set[int] = set()
    for v in vertices:
        _check_vertex(g.n_a, g.n_b, v)
        (sa if v.side is Side.A else sb).add(v.index)
    a_labels = tuple(sorted(sa))
    b_labels = tuple(sorted(sb))
    pos_a = {x: k for k, x in enumerate(a_labels)}
    pos_b = {x: k for k, x in enumerate(b_labels)}
    mask_a, mask_b = bits_of(a_labels), bits_of(b_labels)
    out_a = [_compress(g.out_a[i] & mask_b, pos_b) for i in a_labels]
    out_b = [_compress(g.out_b[j] & mask_a, pos_a) for j in b_labels]
    return Induced(BipartiteDigraph(len(a_labels), len(b_labels), out_a, out_b),
                   a_labels, b_labels)


def _edit(g: BipartiteDigraph, es: Iterable[Edge], add: bool, strict: bool) -> BipartiteDigraph:
    out_a = list(g.out_a)
    out_b = list(g.out_b)
    for u, v in es:
        _check_vertex(g.n_a, g.n_b, u)
        _check_vertex(g.n_a, g.n_b, v)
        if u.side == v.side:
            raise DomainError(f"edge {u}->{v} lies inside one side")
        table = out_a if u.side is Side.A else out_b
        bit = 1 << v.index
        present = bool(table[u.index] & bit)
        if add:
            if present and strict:
                raise DomainError(f"edge {u}->{v} already present")
            table[u.index] |= bit
        else:
            if not present and strict:
                raise DomainError(f"edge {u}->{v} not present")
            table[u.index] &= ~bit
    return BipartiteDigraph(g.n_a, g.n_b, out_a, out_b)


def remove_edges(g: BipartiteDigraph, es: Iterable[Edge], strict: bool = True) -> BipartiteDigraph:
    """G minus ``es``. Removing an absent edge (or the same edge twice) raises in strict mode."""
    return _edit(g, es, add=False, strict=strict)


def add_edges(g: BipartiteDigraph, es: Iterable[Edge], strict: bool = True) -> BipartiteDigraph:
    return _edit(g, es, add=True, strict=strict)


def cycle_edges(seq: Sequence[VertexId]) -> list[Edge]:
    """Consecutive pairs of a cyclic vertex sequence, wrap-around included."""
    k = len(seq)
    if k < 2:
        return []
    return [(seq[i], seq[(i + 1) % k]) for i in range(k)]


def path_edges(seq: Sequence[VertexId]) -> list[Edge]:
    return [(seq[i], seq[i + 1]) for i in range(len(seq) - 1)]


# -- edge-list text format ---------------------------------------------------

HEADER = "bipartite-digraph"


def format_edge_list(g: BipartiteDigraph) -> str:
    lines = [f"{HEADER} {g.n_a} {g.n_b}"]
    lines += [f"{u} {v}" for u, v in g.edges()]
    return "\n".join(lines) + "\n"


def parse_edge_list(text: str) -> BipartiteDigraph:
    """Parse the edge-list format; blank lines and ``#`` comments are skipped."""
    rows = []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if line:
            rows.append(line)
    if not rows:
        raise DomainError("empty edge list")
    head = rows[0].split()
    if len(head) != 3 or head[0] != HEADER:
        raise DomainError(f"bad header {rows[0]!r}, expected '{HEADER} nA nB'")
    try:
        n_a, n_b = int(head[1]), int(head[2])
    except ValueError:
        raise DomainError(f"bad header {rows[0]!r}") from None
    edges = []
    for lineno, line in enumerate(rows[1:], start=2):
        parts = line.split()
        if len(parts) != 2:
            raise DomainError(f"line {lineno}: expected two vertex tokens, got {line!r}")
        edges.append((VertexId.parse(parts[0]), VertexId.parse(parts[1])))
    return BipartiteDigraph.from_edges(n_a, n_b, edges, reject_duplicates=True)


def read_edge_list(path: str | Path) -> BipartiteDigraph:
    return parse_edge_list(Path(path).read_text())


def write_edge_list(g: BipartiteDigraph, path: str | Path) -> None:
    Path(path).write_text(format_edge_list(g))


# -- plain digraphs (used by the Ghouila-Houri routine) ------------------------

class Digraph:
    """Loopless digraph on vertices 0..n-1 with successor/predecessor bitsets."""

    __slots__ = ("n", "succ", "pred")

    def __init__(self, n: int, succ: Sequence[int]):
        if len(succ) != n:
            raise DomainError("successor table does not match vertex count")
        full = (1 << n) - 1
        for v, row in enumerate(succ):
            if row & ~full:
                raise DomainError("successor outside vertex range")
            if row >> v & 1:
                raise DomainError(f"loop at vertex {v}")
        self.n = n
        self.succ = tuple(succ)
        self.pred = _transpose(self.succ, n)

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[tuple[int, int]]) -> "Digraph":
        succ = [0] * n
        for u, v in edges:
            if u == v:
                raise DomainError(f"loop at vertex {u}")
            succ[u] |= 1 << v
        return cls(n, succ)

    def has_edge(self, u: int, v: int) -> bool:
        return bool(self.succ[u] >> v & 1)

    def edges(self) -> Iterator[tuple[int, int]]:
        for u, row in enumerate(self.succ):
            for v in iter_bits(row):
                yield u, v

    def min_out(self) -> int:
        return min((r.bit_count() for r in self.succ), default=0)

    def min_in(self) -> int:
        return min((r.bit_count() for r in self.pred), default=0)

    def _reach(self, table: Sequence[int], start: int) -> int:
        seen = frontier = 1 << start
        while frontier:
            nxt = 0
            for v in iter_bits(frontier):
                nxt |= table[v]
            frontier = nxt & ~seen
            seen |= frontier
        return seen

    def strongly_connected(self) -> bool:
        if self.n == 0:
            return True
        full = (1 << self.n) - 1
        return self._reach(self.succ, 0) == full and self._reach(self.pred, 0) == full

    def __repr__(self) -> str:
        return f"Digraph(n={self.n}, edges={sum(r.bit_count() for r in self.succ)})"
