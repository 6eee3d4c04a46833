"""Independent checks and exhaustive oracles.

Everything here rebuilds adjacency from the raw edge iterator of the graph and
never consults producer-side bookkeeping, so a bug in a constructor cannot be
masked by the same bug in its checker. The exhaustive oracles refuse inputs
above their size caps instead of silently sampling.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Any, Hashable, Iterable, Sequence

from .digraph import BipartiteDigraph, Digraph, VertexId
from .errors import DomainError

MAX_CYCLE_ORACLE_VERTICES = 12
MAX_PATH_ORACLE_VERTICES = 14


@dataclass
class VerificationReport:
    ok: bool
    checks: dict[str, bool] = field(default_factory=dict)
    witness: Any = None
    message: str = ""

    def __bool__(self) -> bool:
        return self.ok

    def to_dict(self) -> dict:
        return {"ok": self.ok, "checks": dict(self.checks),
                "witness": None if self.witness is None else str(self.witness),
                "message": self.message}


@lru_cache(maxsize=16)
def _adjacency(g: BipartiteDigraph | Digraph) -> tuple[list[Hashable], dict[Hashable, set]]:
    # graphs are immutable, so repeated checks against one input share the rebuild;
    # callers must treat the result as read-only
    if isinstance(g, BipartiteDigraph):
        verts: list[Hashable] = list(g.vertices())
    else:
        verts = list(range(g.n))
    adj: dict[Hashable, set] = {v: set() for v in verts}
    for u, v in g.edges():
        adj[u].add(v)
    return verts, adj


def _fail(checks: dict[str, bool], name: str, witness: Any, message: str) -> VerificationReport:
    checks[name] = False
    return VerificationReport(False, checks, witness, message)


def _check_sequence(g, seq: Sequence, closed: bool) -> VerificationReport:
    verts, adj = _adjacency(g)
    universe = set(verts)
    checks: dict[str, bool] = {}
    for v in seq:
        if v not in universe:
            return _fail(checks, "in_graph", v, f"{v} is not a vertex of the graph")
    checks["in_graph"] = True
    counts = Counter(seq)
    for v in seq:
        if counts[v] > 1:
            return _fail(checks, "distinct", v, f"{v} appears {counts[v]} times")
    checks["distinct"] = True
    if len(seq) != len(verts):
        missing = next((v for v in verts if v not in counts), None)
        return _fail(checks, "spanning", missing, f"{missing} is never visited")
    checks["spanning"] = True
    if isinstance(g, BipartiteDigraph) and len(seq) > 1:
        pairs = len(seq) if closed else len(seq) - 1
        for i in range(pairs):
            u, v = seq[i], seq[(i + 1) % len(seq)]
            if u.side == v.side:
                return _fail(checks, "alternating", (u, v), f"{u} and {v} share a side")
        checks["alternating"] = True
    pairs = len(seq) if closed and len(seq) > 1 else len(seq) - 1
    for i in range(pairs):
        u, v = seq[i], seq[(i + 1) % len(seq)]
        if v not in adj[u]:
            return _fail(checks, "edges", (u, v), f"missing edge {u}->{v}")
    checks["edges"] = True
    if closed and len(seq) == 1:
        return _fail(checks, "edges", seq[0], "a single vertex is not a cycle in a loopless digraph")
    return VerificationReport(True, checks)


def is_ham_cycle(g: BipartiteDigraph | Digraph, cycle: Sequence) -> VerificationReport:
    """Pass iff ``cycle`` visits every vertex once and each wrapping pair is an edge."""
    return _check_sequence(g, list(cycle), closed=True)


def is_ham_path(g: BipartiteDigraph | Digraph, path: Sequence, start=None, end=None) -> VerificationReport:
    path = list(path)
    rep = _check_sequence(g, path, closed=False)
    if not rep.ok:
        return rep
    if start is not None and (not path or path[0] != start):
        return _fail(rep.checks, "endpoints", path[0] if path else None, f"path does not start at {start}")
    if end is not None and (not path or path[-1] != end):
        return _fail(rep.checks, "endpoints", path[-1] if path else None, f"path does not end at {end}")
    if start is not None or end is not None:
        rep.checks["endpoints"] = True
    return rep


def pairwise_edge_disjoint(cycles: Iterable[Sequence], closed: bool = True) -> VerificationReport:
    """Pass iff no directed edge is used by two of the given cycles (or paths)."""
    owned: list[set] = []
    seen: set = set()
    for k, seq in enumerate(cycles):
        seq = list(seq)
        pairs = list(zip(seq, seq[1:]))
        if closed and len(seq) > 1:
            pairs.append((seq[-1], seq[0]))
        own = set(pairs)
        if len(own) != len(pairs):
            e = next(e for e, c in Counter(pairs).items() if c > 1)
            return VerificationReport(False, {"disjoint": False}, e,
                                      f"edge {e[0]}->{e[1]} repeated inside item {k}")
        if not seen.isdisjoint(own):
            e = next(e for e in pairs if e in seen)
            first = next(j for j, other in enumerate(owned) if e in other)
            return VerificationReport(False, {"disjoint": False}, e,
                                      f"edge {e[0]}->{e[1]} in items {first} and {k}")
        seen |= own
        owned.append(own)
    return VerificationReport(True, {"disjoint": True})


# -- exhaustive oracles --------------------------------------------------------

def all_ham_cycles(g: BipartiteDigraph | Digraph) -> list[tuple]:
    """Every Hamilton cycle, each listed once, rotated to start at the first vertex."""
    verts, adj = _adjacency(g)
    if len(verts) > MAX_CYCLE_ORACLE_VERTICES:
        raise DomainError(f"oracle capped at {MAX_CYCLE_ORACLE_VERTICES} vertices, got {len(verts)}")
    if len(verts) < 2:
        return []
    root = verts[0]
    n = len(verts)
    out: list[tuple] = []
    path = [root]
    on_path = {root}

    def extend(u):
        if len(path) == n:
            if root in adj[u]:
                out.append(tuple(path))
            return
        for w in adj[u]:
            if w not in on_path:
                path.append(w)
                on_path.add(w)
                extend(w)
                on_path.discard(w)
                path.pop()

    extend(root)
    return out


def brute_force_max_disjoint_ham_cycles(g: BipartiteDigraph | Digraph,
                                        limit: int | None = None) -> tuple[int, list[tuple]]:
    """Largest family of pairwise edge-disjoint Hamilton cycles, by exhaustive search.

    ``limit`` stops the search once a family of that size is found.
    Returns ``(count, witness_family)``.
    """
    cycles = all_ham_cycles(g)
    if not cycles:
        return 0, []
    edge_index: dict[tuple, int] = {}
    masks = []
    for cyc in cycles:
        m = 0
        for i in range(len(cyc)):
            e = (cyc[i], cyc[(i + 1) % len(cyc)])
            m |= 1 << edge_index.setdefault(e, len(edge_index))
        masks.append(m)
    verts, adj = _adjacency(g)
    ceiling = min(len(a) for a in adj.values())  # each cycle uses one out-edge per vertex
    if limit is not None:
        ceiling = min(ceiling, limit)
    best: list[int] = []
    chosen: list[int] = []

    def search(start: int, used: int) -> bool:
        nonlocal best
        if len(chosen) > len(best):
            best = list(chosen)
            if len(best) >= ceiling:
                return True
        if len(chosen) + (len(masks) - start) <= len(best):
            return False
        for k in range(start, len(masks)):
            if masks[k] & used:
                continue
            chosen.append(k)
            if search(k + 1, used | masks[k]):
                return True
            chosen.pop()
        return False

    search(0, 0)
    return len(best), [cycles[k] for k in best]


def enumerate_ham_st_paths(f: BipartiteDigraph | Digraph, s, t, limit: int | None = None) -> int:
    """Exact number of Hamilton paths from ``s`` to ``t`` (or ``limit``, if reached first)."""
    verts, adj = _adjacency(f)
    if len(verts) > MAX_PATH_ORACLE_VERTICES:
        raise DomainError(f"oracle capped at {MAX_PATH_ORACLE_VERTICES} vertices, got {len(verts)}")
    if s not in adj or t not in adj:
        raise DomainError("endpoints must be vertices of the graph")
    n = len(verts)
    if n == 1:
        return 1 if s == t else 0
    if s == t:
        return 0
    count = 0
    on_path = {s}

    def extend(u, depth):
        nonlocal count
        if limit is not None and count >= limit:
            return
        if depth == n:
            if u == t:
                count += 1
            return
        for w in adj[u]:
            if w in on_path or (w == t and depth + 1 != n):
                continue
            on_path.add(w)
            extend(w, depth + 1)
            on_path.discard(w)

    extend(s, 1)
    return count


def cycle_vertices_str(cycle: Sequence[VertexId]) -> list[str]:
    return [str(v) for v in cycle]
