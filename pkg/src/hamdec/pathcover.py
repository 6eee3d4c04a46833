"""Many edge-disjoint path covers of a nearly regular balanced bipartite digraph.

The vertex classes are cut into b random blocks each. A Hamilton path of
D_{b,b} names a chain of 2b-1 block pairs; the edges between consecutive
blocks form bipartite views, and the j-th large matching of every view in the
chain joins up into one path cover. The b paths of an edge-disjoint family
use disjoint block pairs, so covers from different chains never share edges.
"""

from __future__ import annotations

import math
import random
import statistics
from dataclasses import dataclass, field
from typing import Sequence

from .digraph import BipartiteDigraph, Edge, Side, VertexId, bits_of, path_edges
from .errors import ConstructionFailure, DomainError
from .generators import ham_paths_complete, rng_for
from .matchings import BipartiteView, MatchingCollection, Thresholds, extract_matching_collection
from .partition import part_sizes

# finite-n slack used by practical runs: keep matchings within sqrt of a perfect one
PRACTICAL_THRESHOLDS = Thresholds(count=None, size=0.5, degree=None, window=None)


@dataclass(frozen=True)
class PathCover:
    """Vertex-disjoint directed paths covering every vertex once."""

    paths: tuple[tuple[VertexId, ...], ...]

    @classmethod
    def from_edges(cls, vertices: Sequence[VertexId], edges: Sequence[Edge]) -> "PathCover":
        succ: dict[VertexId, VertexId] = {}
        has_pred: set[VertexId] = set()
        for u, v in edges:
            if u in succ or v in has_pred:
                raise DomainError(f"edge {u}->{v} breaks vertex-disjointness")
            succ[u] = v
            has_pred.add(v)
        paths, seen = [], set()
        for v in vertices:
            if v in has_pred or v in seen:
                continue
            seq = [v]
            seen.add(v)
            while seq[-1] in succ:
                w = succ[seq[-1]]
                seq.append(w)
                seen.add(w)
            paths.append(tuple(seq))
        if len(seen) != len(set(vertices)):
            raise DomainError("edges contain a directed cycle")
        return cls(tuple(paths))

    @property
    def starts(self) -> list[VertexId]:
        return [p[0] for p in self.paths]

    @property
    def ends(self) -> list[VertexId]:
        return [p[-1] for p in self.paths]

    @property
    def index(self) -> dict[VertexId, int]:
        return {v: k for k, p in enumerate(self.paths) for v in p}

    def __len__(self) -> int:
        return len(self.paths)

    def edges(self) -> list[Edge]:
        return [e for p in self.paths for e in path_edges(p)]

    def num_vertices(self) -> int:
        return sum(len(p) for p in self.paths)


def default_b(m: int) -> int:
    """Block count 2 log^4 m, clamped to [1, m]."""
    if m < 2:
        return 1
    return max(1, min(m, math.floor(2 * math.log(m) ** 4)))


@dataclass(frozen=True)
class PathCoverConfig:
    b: int | None = None                  # None: 2 log^4 m clamped to m
    thresholds: Thresholds = Thresholds()
    window_exp: float = 3 / 5
    retry_budget: int = 20
    strict: bool = False

    def __post_init__(self):
        if self.b is not None and self.b < 1:
            raise DomainError("b must be at least 1")
        if self.retry_budget < 1:
            raise DomainError("retry_budget must be at least 1")


@dataclass
class BlockPartition:
    blocks_a: list[tuple[VertexId, ...]]
    blocks_b: list[tuple[VertexId, ...]]
    report: dict = field(default_factory=dict)
    degraded: bool = False
    attempts: int = 1

    @property
    def b(self) -> int:
        return len(self.blocks_a)


def _median_semidegree(h: BipartiteDigraph) -> float:
    degs = [x for pair in h.degree_sequence() for x in pair]
    return statistics.median(degs) if degs else 0.0


def block_partition(h: BipartiteDigraph, b: int, seed=0, r: float | None = None,
                    window_exp: float = 3 / 5, retry_budget: int = 20,
                    strict: bool = False) -> BlockPartition:
    """Random partition of each class into b blocks with degree windows checked.

    Every degree from a vertex into a block of the other class must lie within
    ``r_j ± r_j**window_exp`` with r_j = r |block| / m (= r/b when b divides m).
    """
    if not h.balanced():
        raise DomainError("block partition needs a balanced digraph")
    m = h.n_a
    if not 1 <= b <= max(m, 1):
        raise DomainError(f"need 1 <= b <= m, got b={b}, m={m}")
    if r is None:
        r = _median_semidegree(h)
    sizes = part_sizes(m, b)
    best = None
    for attempt in range(1, retry_budget + 1):
        rng = rng_for(seed, "blocks", attempt)
        cut = []
        for side in (Side.A, Side.B):
            perm = list(range(m))
            rng.shuffle(perm)
            blocks, pos = [], 0
            for sz in sizes:
                blocks.append(tuple(VertexId(side, x) for x in sorted(perm[pos:pos + sz])))
                pos += sz
            cut.append(blocks)
        worst = (0.0, None, 0.0)
        for own, other in ((cut[0], cut[1]), (cut[1], cut[0])):
            masks = [bits_of(v.index for v in blk) for blk in other]
            for blk in own:
                for v in blk:
                    for direction in ("out", "in"):
                        row = h.nbits(v, direction)
                        for j, mask in enumerate(masks):
                            centre = r * sizes[j] / m
                            window = centre ** window_exp if centre > 0 else 0.0
                            dev = abs((row & mask).bit_count() - centre)
                            if dev - window > worst[0] - worst[2] or worst[1] is None:
                                worst = (dev, f"{v} {direction} into block {j}", window)
        ok = worst[0] <= worst[2] + 1e-12
        report = {"pass": ok, "r": r, "b": b, "worst_deviation": worst[0], "window": worst[2],
                  "worst": worst[1], "attempt": attempt}
        part = BlockPartition(cut[0], cut[1], report, not ok, attempt)
        if ok:
            return part
        if best is None or worst[0] - worst[2] < best.report["worst_deviation"] - best.report["window"]:
            best = part
    best.degraded = True
    best.attempts = retry_budget
    if strict:
        raise ConstructionFailure(
            f"block degree windows failing after {retry_budget} attempts; worst {best.report['worst']}",
            best.report)
    return best


def matching_chain_for_path(h: BipartiteDigraph, blocks: BlockPartition,
                            path: Sequence[VertexId]) -> list[BipartiteView]:
    """The 2b-1 views along a Hamilton path of D_{b,b} that starts in the A index class."""
    b = blocks.b
    path = list(path)
    if len(path) != 2 * b or len(set(path)) != 2 * b:
        raise DomainError(f"expected a Hamilton path of D_{{{b},{b}}}, got {len(path)} vertices")
    if path[0].side is not Side.A:
        raise DomainError("path must start in the A index class")
    for k, v in enumerate(path):
        if v.side is not (Side.A if k % 2 == 0 else Side.B) or not 0 <= v.index < b:
            raise DomainError(f"position {k} holds {v}, breaking alternation")

    def block(v: VertexId):
        return (blocks.blocks_a if v.side is Side.A else blocks.blocks_b)[v.index]

    return [BipartiteView.from_graph(h, block(u), block(w)) for u, w in zip(path, path[1:])]


def block_paths(b: int, seed=0) -> list[tuple[VertexId, ...]]:
    """b edge-disjoint Hamilton paths of D_{b,b}, all starting in the A class."""
    if b == 1:
        return [(VertexId(Side.A, 0), VertexId(Side.B, 0))]
    return ham_paths_complete(b, seed=seed, start_side=Side.A).paths


@dataclass
class PathCoverCollection:
    covers: list[PathCover]
    stats: dict
    degraded: bool = False
    blocks: BlockPartition | None = None


def union_out_degrees(h: BipartiteDigraph, covers: Sequence[PathCover]) -> dict[VertexId, int]:
    """Out-degree of each vertex in the union of the covers (covers where it is not a path end)."""
    deg = {v: 0 for v in h.vertices()}
    for cov in covers:
        for u, _ in cov.edges():
            deg[u] += 1
    return deg


def lemma_targets(m: int, r: float) -> dict[str, float]:
    logm = math.log(m) if m > 1 else 0.0
    return {
        "count": r - m ** (24 / 25) * logm,
        "max_size": m / logm ** 4 if logm > 0 else float(m),
        "union_min_semidegree": r - (m / logm ** 3.9 if logm > 0 else m),
    }


def build_path_covers(h: BipartiteDigraph, r: float | None = None,
                      cfg: PathCoverConfig = PathCoverConfig(), seed=0) -> PathCoverCollection:
    """Edge-disjoint path covers of ``h`` through block chains; see the module docstring."""
    if not h.balanced():
        raise DomainError("path covers need a balanced digraph")
    m = h.n_a
    if m == 0:
        return PathCoverCollection([], {"covers": 0})
    if r is None:
        r = _median_semidegree(h)
    b = cfg.b if cfg.b is not None else default_b(m)
    b = min(b, m)
    blocks = block_partition(h, b, seed=seed, r=r, window_exp=cfg.window_exp,
                             retry_budget=cfg.retry_budget, strict=cfg.strict)
    r_block = r / b
    r_prime = r_block - r_block ** cfg.window_exp if r_block > 0 else 0.0
    vertices = list(h.vertices())
    covers: list[PathCover] = []
    chains = []
    for t, bp in enumerate(block_paths(b, seed=rng_for(seed, "blockpaths").randrange(2 ** 32))):
        views = matching_chain_for_path(h, blocks, bp)
        rng = rng_for(seed, "chain", t)
        collections: list[MatchingCollection] = []
        for view in views:
            try:
                coll = extract_matching_collection(view, r_prime, m=max(view.nx, view.ny),
                                                   thresholds=cfg.thresholds,
                                                   check_window=cfg.strict, rng=rng)
            except DomainError as exc:
                if cfg.strict:
                    raise ConstructionFailure(f"chain {t}: {exc}", {"chain": t}) from exc
                coll = extract_matching_collection(view, r_prime, m=max(view.nx, view.ny),
                                                   thresholds=cfg.thresholds,
                                                   check_window=False, rng=rng)
            collections.append(coll)
        depth = min(len(c) for c in collections)
        for j in range(depth):
            es = [e for c in collections for e in c.matchings[j].edges]
            covers.append(PathCover.from_edges(vertices, es))
        chains.append({"chain": t, "views": len(views), "depth": depth,
                       "per_view": [len(c) for c in collections],
                       "degraded_views": sum(c.degraded for c in collections)})

    for cov in covers:
        if cov.num_vertices() != 2 * m:
            raise AssertionError("cover does not partition the vertex set")
        if len(cov) != 2 * m - len(cov.edges()):
            raise AssertionError("path count identity broken")
    deg = union_out_degrees(h, covers)
    ends = {v: 0 for v in vertices}
    for cov in covers:
        for v in cov.ends:
            ends[v] += 1
    if any(deg[v] != len(covers) - ends[v] for v in vertices):
        raise AssertionError("union degree disagrees with endpoint lists")
    targets = lemma_targets(m, r)
    achieved = {"count": len(covers),
                "max_size": max((len(c) for c in covers), default=0),
                "union_min_semidegree": min(deg.values(), default=0)}
    shortfalls = []
    if achieved["count"] < targets["count"]:
        shortfalls.append("count")
    if covers and achieved["max_size"] > targets["max_size"]:
        shortfalls.append("max_size")
    if achieved["union_min_semidegree"] < targets["union_min_semidegree"]:
        shortfalls.append("union_min_semidegree")
    stats = {"m": m, "b": b, "r": r, "r_prime": r_prime, "covers": len(covers),
             "targets": targets, "achieved": achieved, "shortfalls": shortfalls,
             "chains": chains, "blocks": blocks.report}
    if cfg.strict and shortfalls:
        raise ConstructionFailure(f"path cover targets missed: {shortfalls}", stats)
    return PathCoverCollection(covers, stats, bool(shortfalls) or blocks.degraded, blocks)
