"""End-to-end search for many edge-disjoint Hamilton cycles.

``strict`` and ``practical`` run the structured construction: partition the
input into pieces H_i, build path covers of each H_i[U_i], and close every
cover into a Hamilton cycle of H_i by routing through the reservoir W_i.
``greedy`` repeatedly extracts one Hamilton cycle from the residual digraph;
practical mode also runs it on whatever the structured stage leaves behind.

Every cycle is re-verified against the original input before it is returned.
"""

from __future__ import annotations

import json
import random
import time
from dataclasses import dataclass, field
from typing import Literal, Sequence

from .digraph import (BipartiteDigraph, Side, VertexId, cycle_edges, induced, iter_bits,
                      min_max_semidegree, path_edges)
from .errors import ConstructionFailure, DomainError, InvariantViolation
from .generators import HamCycle, rng_for
from .hampath import ham_st_path, lemma_degree_bound, search_ham_cycle_flat, search_ham_st_path
from .matchings import UNMATCHED, Thresholds, hopcroft_karp
from .partition import PartitionConfig, build_partition_plan, default_k
from .pathcover import PRACTICAL_THRESHOLDS, PathCoverConfig, build_path_covers
from .verify import is_ham_cycle, pairwise_edge_disjoint

Mode = Literal["strict", "practical", "greedy"]
MODES = ("strict", "practical", "greedy")
SEARCH_FALLBACK_VERTICES = 24      # exhaustive backup search only on small residuals


@dataclass(frozen=True)
class DecompositionConfig:
    mode: Mode = "practical"
    epsilon: float = 0.05
    c: float | None = None                 # None: d / n of the input
    seed: int = 0
    K: int | None = None                   # None: floor(ln n) in strict mode, 2 otherwise
    b: int | None = None                   # None: 2 log^4 m in strict mode, practical_b otherwise
    partition_retries: int = 5
    close_attempts: int = 6
    search_budget: int = 20_000
    greedy_passes: int | None = None       # None: 16 for n <= 6, else 1
    greedy_restarts: int = 8               # fresh 1-factors per cycle, n kicks each
    fallback: bool = True                  # practical mode only: greedy on the leftover

    def __post_init__(self):
        if self.mode not in MODES:
            raise DomainError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not 0 < self.epsilon < 1:
            raise DomainError("epsilon must lie in (0, 1)")


@dataclass
class DecompositionResult:
    n: int
    d: int
    num_edges: int
    mode: str
    cycles: list[HamCycle]
    residual_edges: int
    stats: dict = field(default_factory=dict)

    @property
    def leftover(self) -> int:
        return self.num_edges - 2 * self.n * len(self.cycles)

    @property
    def achieved_fraction(self) -> float:
        return len(self.cycles) / self.d if self.d else 0.0


class _Residual:
    """Mutable bitset copy of a bipartite digraph, for removing cycles one at a time."""

    def __init__(self, g: BipartiteDigraph):
        self.n_a, self.n_b = g.n_a, g.n_b
        self.out_a = list(g.out_a)
        self.out_b = list(g.out_b)

    def graph(self) -> BipartiteDigraph:
        return BipartiteDigraph(self.n_a, self.n_b, self.out_a, self.out_b)

    def has(self, u: VertexId, v: VertexId) -> bool:
        rows = self.out_a if u.side is Side.A else self.out_b
        return bool(rows[u.index] >> v.index & 1)

    def remove_cycle(self, cycle: Sequence[VertexId]) -> None:
        for u, v in cycle_edges(cycle):
            rows = self.out_a if u.side is Side.A else self.out_b
            if not rows[u.index] >> v.index & 1:
                raise InvariantViolation(f"edge {u}->{v} already used")
            rows[u.index] &= ~(1 << v.index)

    def num_edges(self) -> int:
        return sum(r.bit_count() for r in self.out_a) + sum(r.bit_count() for r in self.out_b)


# -- greedy -----------------------------------------------------------------------

def _factor_cycles(sigma: list[int], tau: list[int]) -> list[int]:
    """Cycle id of each A vertex in the cycle factor a -> sigma(a) -> tau(sigma(a))."""
    cid = [-1] * len(sigma)
    k = 0
    for a in range(len(sigma)):
        if cid[a] >= 0:
            continue
        x = a
        while cid[x] < 0:
            cid[x] = k
            x = tau[sigma[x]]
        k += 1
    return cid


def _patch_factor(out_a: list[int], out_b: list[int], n: int, rng: random.Random,
                  kicks: int) -> list[VertexId] | None:
    """Merge the cycles of a random 1-factor by 2-swaps of matched edges."""
    sigma, _ = hopcroft_karp(out_a, n, rng)
    tau, _ = hopcroft_karp(out_b, n, rng)
    if UNMATCHED in sigma or UNMATCHED in tau:
        return None
    order = list(range(n))
    while True:
        cid = _factor_cycles(sigma, tau)
        count = max(cid) + 1
        if count == 1:
            seq, a = [], 0
            for _ in range(n):
                seq += [VertexId(Side.A, a), VertexId(Side.B, sigma[a])]
                a = tau[sigma[a]]
            return seq
        sigma_inv = [0] * n
        for a, b in enumerate(sigma):
            sigma_inv[b] = a
        tau_inv = [0] * n
        for b, a in enumerate(tau):
            tau_inv[a] = b
        # B vertex b lies in the cycle of sigma_inv[b]; A vertex a in cid[a]
        cyc_b = [0] * count
        cyc_a = [0] * count
        for a in range(n):
            cyc_a[cid[a]] |= 1 << a
            cyc_b[cid[a]] |= 1 << sigma[a]
        rng.shuffle(order)
        merged = False
        for a1 in order:
            b1 = sigma[a1]
            for b2 in iter_bits(out_a[a1] & ~cyc_b[cid[a1]]):
                a2 = sigma_inv[b2]
                if out_a[a2] >> b1 & 1:
                    sigma[a1], sigma[a2] = b2, b1
                    merged = True
                    break
            if merged:
                break
            # B-side swap: b1 -> tau(b1) and b2 -> tau(b2) exchanged
            a1t = tau[b1]
            for a2t in iter_bits(out_b[b1] & ~cyc_a[cid[a1]]):
                b2 = tau_inv[a2t]
                if out_b[b2] >> a1t & 1:
                    tau[b1], tau[b2] = a2t, a1t
                    merged = True
                    break
            if merged:
                break
        if merged:
            continue
        if kicks <= 0:
            return None
        kicks -= 1
        # no merging swap: split a cycle by a random swap and try again
        moves = []
        for a1 in range(n):
            for b2 in iter_bits(out_a[a1] & ~(1 << sigma[a1])):
                if out_a[sigma_inv[b2]] >> sigma[a1] & 1:
                    moves.append((a1, sigma_inv[b2]))
        if not moves:
            return None
        a1, a2 = rng.choice(moves)
        sigma[a1], sigma[a2] = sigma[a2], sigma[a1]


def greedy_ham_cycle(g: BipartiteDigraph, rng: random.Random, restarts: int = 8,
                     search_budget: int = 20_000) -> list[VertexId] | None:
    """One Hamilton cycle of a balanced bipartite digraph, or None after the budget."""
    n = g.n_a
    if not g.balanced() or n == 0:
        return None
    out_a, out_b = list(g.out_a), list(g.out_b)
    for _ in range(restarts):
        found = _patch_factor(out_a, out_b, n, rng, kicks=n)
        if found is not None:
            return found
        if min(r.bit_count() for r in out_a + out_b) <= 1:
            break                     # 1-factor is forced; further restarts are pointless
    if 2 * n > SEARCH_FALLBACK_VERTICES:
        return None
    flat = search_ham_cycle_flat(g.to_digraph(), budget=search_budget)
    return None if flat is None else [g.from_flat(k) for k in flat]


def _greedy_pass(g: BipartiteDigraph, residual: _Residual, rng: random.Random,
                 cfg: DecompositionConfig, check_regular: bool) -> list[HamCycle]:
    cycles: list[HamCycle] = []
    d0 = residual.graph().regular_degree() if check_regular else None
    while True:
        cur = residual.graph()
        if cur.num_edges == 0:
            break
        cyc = greedy_ham_cycle(cur, rng, cfg.greedy_restarts, cfg.search_budget)
        if cyc is None:
            break
        if not is_ham_cycle(g, cyc):
            raise InvariantViolation("greedy produced an invalid cycle")
        residual.remove_cycle(cyc)
        cycles.append(tuple(cyc))
        if d0 is not None:
            left = residual.graph().regular_degree()
            if left != d0 - len(cycles):
                raise InvariantViolation(f"residual not {d0 - len(cycles)}-regular after removal")
    return cycles


def greedy_decompose(g: BipartiteDigraph, cfg: DecompositionConfig,
                     start: _Residual | None = None) -> tuple[list[HamCycle], dict]:
    """Best of several independent greedy passes from ``start`` (default: all of g)."""
    n = g.n_a
    passes = cfg.greedy_passes if cfg.greedy_passes is not None else (16 if n <= 6 else 1)
    base = start or _Residual(g)
    target = base.graph().regular_degree()
    best: list[HamCycle] = []
    best_res = None
    for p in range(passes):
        res = _Residual(base.graph())
        rng = rng_for(cfg.seed, "greedy", p)
        cycles = _greedy_pass(g, res, rng, cfg, check_regular=target is not None)
        if best_res is None or len(cycles) > len(best):
            best, best_res = cycles, res
        if target is not None and len(best) >= target:
            break
    base.out_a, base.out_b = best_res.out_a, best_res.out_b
    return best, {"passes_run": p + 1, "cycles": len(best)}


# -- stitching ----------------------------------------------------------------------

def pick_connectors(f: BipartiteDigraph, endpoints: Sequence[tuple[VertexId, VertexId]],
                    w: Sequence[VertexId], fallback: bool = False) -> list[tuple[VertexId, VertexId]]:
    """Distinct s_j, t_j in ``w`` with (y_j, s_j) and (t_j, x_{j+1}) edges of ``f``.

    Greedy in order j = 1..l, lowest index first. With ``fallback`` a greedy
    dead end is retried as a bipartite matching of the 2l slots to ``w``.
    """
    ell = len(endpoints)
    pool = sorted(w, key=lambda v: (v.side, v.index))
    used: set[VertexId] = set()
    out = []
    stuck = None
    for j, (_, y) in enumerate(endpoints):
        x_next = endpoints[(j + 1) % ell][0]
        s = next((v for v in pool if v not in used and f.has_edge(y, v)), None)
        if s is None:
            stuck = (y, "out")
            break
        used.add(s)
        t = next((v for v in pool if v not in used and f.has_edge(v, x_next)), None)
        if t is None:
            stuck = (x_next, "in")
            break
        used.add(t)
        out.append((s, t))
    if stuck is None:
        return out
    if fallback:
        slots = []
        for j, (_, y) in enumerate(endpoints):
            slots.append(f.nbits(y, "out"))
            slots.append(f.nbits(endpoints[(j + 1) % ell][0], "in"))
        pos = {v: k for k, v in enumerate(pool)}
        adj = []
        for k, row in enumerate(slots):
            anchor = endpoints[k // 2][1] if k % 2 == 0 else endpoints[(k // 2 + 1) % ell][0]
            side = anchor.side.other
            adj.append(sum(1 << pos[VertexId(side, i)] for i in iter_bits(row) if VertexId(side, i) in pos))
        mx, _ = hopcroft_karp(adj, len(pool))
        if UNMATCHED not in mx:
            return [(pool[mx[2 * j]], pool[mx[2 * j + 1]]) for j in range(ell)]
    v, direction = stuck
    raise ConstructionFailure(f"no free reservoir vertex on the {direction}-side of endpoint {v}",
                              {"endpoint": str(v), "direction": direction})


def _split_reservoir(w: Sequence[VertexId], connectors: Sequence[tuple[VertexId, VertexId]],
                     rng: random.Random) -> list[list[VertexId]]:
    """Parts of ``w``, part j holding s_j, t_j and balanced so an s_j-t_j path can span it."""
    taken = {v for pair in connectors for v in pair}
    free_a = [v for v in w if v.side is Side.A and v not in taken]
    free_b = [v for v in w if v.side is Side.B and v not in taken]
    rng.shuffle(free_a)
    rng.shuffle(free_b)
    parts = []
    for s, t in connectors:
        part = [s, t]
        if s.side is t.side:
            # both on one side: that side must come out larger by exactly one
            pool = free_b if s.side is Side.A else free_a
            if not pool:
                raise ConstructionFailure("reservoir too small to balance a same-side part")
            part.append(pool.pop())
        parts.append(part)
    if len(free_a) != len(free_b):
        raise ConstructionFailure("free reservoir vertices are unbalanced")
    for va, vb in zip(free_a, free_b):
        smallest = min(range(len(parts)), key=lambda k: (len(parts[k]), k))
        parts[smallest] += [va, vb]
    sizes = [len(p) for p in parts]
    if sizes and max(sizes) - min(sizes) > 2:
        raise InvariantViolation(f"reservoir part sizes {sizes} differ by more than 2")
    for (s, t), part in zip(connectors, parts):
        na = sum(v.side is Side.A for v in part)
        if na - (len(part) - na) != (s.side is Side.A) + (t.side is Side.A) - 1:
            raise InvariantViolation("reservoir part breaks the balance rule")
    return parts


def _part_path(f: BipartiteDigraph, part: Sequence[VertexId], s: VertexId, t: VertexId,
               rng: random.Random, budget: int) -> list[VertexId] | None:
    sub = induced(f, part)
    pos_a = {x: k for k, x in enumerate(sub.a_labels)}
    pos_b = {x: k for k, x in enumerate(sub.b_labels)}

    def loc(v):
        return VertexId(v.side, (pos_a if v.side is Side.A else pos_b)[v.index])

    h = sub.graph
    path = None
    if min(h.n_a, h.n_b) >= 1 and min_max_semidegree(h)[0] >= lemma_degree_bound(h):
        try:
            path = ham_st_path(h, loc(s), loc(t), degree_check="lemma", rng=rng)
        except (ConstructionFailure, DomainError, InvariantViolation):
            path = None
    if path is None:
        path = search_ham_st_path(h, loc(s), loc(t), budget=budget)
    return None if path is None else [sub.lift(v) for v in path]


def close_cover(f: BipartiteDigraph, paths: Sequence[Sequence[VertexId]], w: Sequence[VertexId],
                connectors: Sequence[tuple[VertexId, VertexId]], rng: random.Random | None = None,
                attempts: int = 6, search_budget: int = 20_000) -> list[VertexId]:
    """Join the cover paths through s_j-t_j paths spanning parts of ``w``."""
    rng = rng or random.Random(0)
    if len(connectors) != len(paths):
        raise DomainError("need one connector pair per path")
    failures = []
    for attempt in range(attempts):
        parts = _split_reservoir(w, connectors, rng)
        inner = []
        for (s, t), part in zip(connectors, parts):
            seg = _part_path(f, part, s, t, rng, search_budget)
            if seg is None:
                failures.append({"attempt": attempt, "part": [str(v) for v in part]})
                break
            inner.append(seg)
        else:
            cycle = []
            for p, seg in zip(paths, inner):
                cycle += list(p) + seg
            rep = is_ham_cycle(f, cycle)
            if not rep:
                raise InvariantViolation(f"closed cover is not a Hamilton cycle: {rep.message}")
            return cycle
    raise ConstructionFailure(f"no reservoir split closed the cover in {attempts} attempts",
                              {"failures": failures[-3:]})


# -- orchestration ---------------------------------------------------------------------

def practical_b(m: int, r: float) -> int:
    """Largest of 8, 4, 2 leaving at least two expected edges per block pair."""
    for b in (8, 4, 2):
        if b <= m and r / b >= 2:
            return b
    return min(2, max(m, 1))


def _structured(g: BipartiteDigraph, cfg: DecompositionConfig, residual: _Residual,
                stats: dict) -> list[HamCycle]:
    n = g.n_a
    d = g.regular_degree()
    strict = cfg.mode == "strict"
    c = cfg.c if cfg.c is not None else d / n
    if not 0 < cfg.epsilon < c - 0.5:
        msg = f"epsilon {cfg.epsilon} outside (0, c - 1/2) for c = {c:.4f}"
        if strict:
            raise DomainError(msg)
        stats.setdefault("warnings", []).append(msg)
    K = cfg.K if cfg.K is not None else (default_k(n) if strict else 2)
    stats["K"] = K
    if n < K * K:
        raise DomainError(f"n = {n} is below K^2 = {K * K}")
    t0 = time.perf_counter()
    plan = build_partition_plan(
        g, PartitionConfig(K=K, epsilon=cfg.epsilon, c=c, retry_budget=cfg.partition_retries,
                           strict=False), seed=cfg.seed)
    stats["time_partition"] = time.perf_counter() - t0
    stats["plan"] = {"degraded": plan.degraded, "attempts": plan.attempts, "r": plan.r,
                     "failed": plan.report.get("failed", []), "report": plan.report}
    if strict and plan.degraded:
        raise ConstructionFailure(f"partition properties failing: {plan.report['failed']}", plan.report)

    cycles: list[HamCycle] = []
    per_sub = []
    t_cover = t_stitch = 0.0
    for i, h in enumerate(plan.subgraphs):
        w = plan.w_vertices(i)
        u = plan.u_vertices(i)
        u_set = set(u)
        sub = induced(h, u)
        entry = {"i": i, "covers": 0, "stitched": 0, "connector_failures": 0, "close_failures": 0}
        per_sub.append(entry)
        t1 = time.perf_counter()
        m = sub.graph.n_a
        if m == 0 or sub.graph.n_b != m:
            continue
        pcfg = PathCoverConfig(
            b=cfg.b if cfg.b is not None else (None if strict else practical_b(m, plan.r)),
            thresholds=Thresholds() if strict else PRACTICAL_THRESHOLDS, strict=strict)
        try:
            coll = build_path_covers(sub.graph, plan.r, pcfg, seed=rng_for(cfg.seed, "covers", i).randrange(2 ** 32))
        except ConstructionFailure as exc:
            entry["cover_failure"] = str(exc)
            if strict:
                raise
            continue
        t_cover += time.perf_counter() - t1
        entry["covers"] = len(coll.covers)
        entry["cover_stats"] = {k: coll.stats[k] for k in ("b", "achieved", "targets", "shortfalls")}
        t2 = time.perf_counter()
        local = _Residual(h)
        rng = rng_for(cfg.seed, "stitch", i)
        for cover in coll.covers:
            paths = [tuple(sub.lift(v) for v in p) for p in cover.paths]
            f = local.graph()
            endpoints = [(p[0], p[-1]) for p in paths]
            try:
                conn = pick_connectors(f, endpoints, w, fallback=not strict)
            except ConstructionFailure:
                entry["connector_failures"] += 1
                continue
            try:
                cyc = close_cover(f, paths, w, conn, rng, cfg.close_attempts, cfg.search_budget)
            except ConstructionFailure:
                entry["close_failures"] += 1
                continue
            inside = {e for e in cycle_edges(cyc) if e[0] in u_set and e[1] in u_set}
            if inside != {e for p in paths for e in path_edges(p)}:
                raise InvariantViolation("cycle inside U_i differs from its source cover")
            if not is_ham_cycle(g, cyc):
                raise InvariantViolation("stitched cycle fails against the input graph")
            local.remove_cycle(cyc)
            residual.remove_cycle(cyc)
            cycles.append(tuple(cyc))
            entry["stitched"] += 1
        t_stitch += time.perf_counter() - t2
    stats["subgraphs"] = per_sub
    stats["time_covers"] = t_cover
    stats["time_stitch"] = t_stitch
    attempted = sum(e["covers"] for e in per_sub)
    stats["stitch_success_rate"] = len(cycles) / attempted if attempted else 0.0
    return cycles


def _validate_input(g: BipartiteDigraph) -> int:
    if not g.balanced():
        raise DomainError("input must be balanced")
    d = g.regular_degree()
    if d is None:
        raise DomainError("input must be regular")
    return d


def decompose(g: BipartiteDigraph, cfg: DecompositionConfig = DecompositionConfig()) -> DecompositionResult:
    """Edge-disjoint Hamilton cycles of a balanced d-regular bipartite digraph."""
    d = _validate_input(g)
    n = g.n_a
    stats: dict = {"mode": cfg.mode, "seed": cfg.seed, "epsilon": cfg.epsilon}
    residual = _Residual(g)
    cycles: list[HamCycle] = []
    start = time.perf_counter()
    if d > 0 and cfg.mode in ("strict", "practical"):
        structured: list[HamCycle] = []
        try:
            structured = _structured(g, cfg, residual, stats)
        except (ConstructionFailure, DomainError) as exc:
            if cfg.mode == "strict":
                stats["failed_stage"] = str(exc)
            else:
                stats.setdefault("warnings", []).append(f"structured stage skipped: {exc}")
        cycles += structured
        stats["structured_cycles"] = len(structured)
        if cfg.mode == "practical" and cfg.fallback:
            t0 = time.perf_counter()
            extra, info = greedy_decompose(g, cfg, residual)
            cycles += extra
            stats["fallback_cycles"] = len(extra)
            stats["time_fallback"] = time.perf_counter() - t0
            stats["fallback"] = info
    elif d > 0:
        t0 = time.perf_counter()
        cycles, info = greedy_decompose(g, cfg, residual)
        stats["greedy"] = info
        stats["time_greedy"] = time.perf_counter() - t0
    stats["time_total"] = time.perf_counter() - start
    result = DecompositionResult(n, d, g.num_edges, cfg.mode, cycles, residual.num_edges(), stats)
    audit = audit_result(g, result)
    if not audit["ok"]:
        raise InvariantViolation(f"decomposition failed its audit: {audit}")
    stats["audit"] = audit
    return result


def audit_result(g: BipartiteDigraph, result: DecompositionResult) -> dict:
    """Independent end-to-end check: validity, disjointness, edge accounting."""
    bad = next((k for k, c in enumerate(result.cycles) if not is_ham_cycle(g, c)), None)
    disjoint = pairwise_edge_disjoint(result.cycles)
    remaining = {e for e in g.edges()} - {e for c in result.cycles for e in cycle_edges(c)}
    identity = 2 * g.n_a * len(result.cycles) + len(remaining) == g.num_edges
    return {"ok": bad is None and disjoint.ok and identity and len(remaining) == result.residual_edges,
            "invalid_cycle": bad, "disjoint": disjoint.ok,
            "disjoint_witness": None if disjoint.ok else str(disjoint.witness),
            "accounting_identity": identity, "residual_edges": len(remaining)}


def stage_stats(result: DecompositionResult) -> dict:
    """JSON-ready summary of a run."""
    s = result.stats
    subs = s.get("subgraphs", [])
    report = {
        "mode": result.mode, "n": result.n, "d": result.d, "edges": result.num_edges,
        "cycles": len(result.cycles), "achieved_fraction": result.achieved_fraction,
        "leftover": result.leftover, "residual_edges": result.residual_edges,
        "K": s.get("K"), "covers_per_subgraph": [e["covers"] for e in subs],
        "stitched_per_subgraph": [e["stitched"] for e in subs],
        "stitch_success_rate": s.get("stitch_success_rate", 0.0),
        "structured_cycles": s.get("structured_cycles", 0),
        "fallback_cycles": s.get("fallback_cycles", 0),
        "failed_stage": s.get("failed_stage"), "warnings": s.get("warnings", []),
        "wall_time": {k[5:]: v for k, v in s.items() if k.startswith("time_")},
        "audit": s.get("audit"),
    }
    if "plan" in s:
        report["plan"] = s["plan"]
    if subs:
        report["subgraphs"] = subs
    return report


def stage_stats_json(result: DecompositionResult) -> str:
    return json.dumps(stage_stats(result), indent=2, sort_keys=True, default=str)
