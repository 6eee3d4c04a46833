"""Split a regular bipartite digraph into K^3 edge-disjoint spanning pieces.

Each piece H_i comes with a reservoir W_i (one part of one of K random
equipartitions) and its complement U_i. Edges inside exactly one reservoir go
to that reservoir's piece; edges inside no reservoir are spread over the
pieces at random, landing in E_i (between U_i and W_i) with total probability
epsilon and in D_i (inside U_i) otherwise. Edges inside two or more
reservoirs are discarded.

The concentration properties the construction relies on are checked on the
sampled plan, and the whole sample is redrawn when one fails.
"""

from __future__ import annotations

import json
import math
import random
import statistics
from dataclasses import dataclass, field
from typing import Any

from .digraph import BipartiteDigraph, Side, VertexId, bits_of, iter_bits
from .errors import ConstructionFailure, DomainError
from .generators import rng_for


def default_k(n: int) -> int:
    return max(2, math.floor(math.log(n))) if n > 1 else 2


@dataclass(frozen=True)
class PartitionConfig:
    K: int | None = None          # None: max(2, floor(ln n))
    epsilon: float = 0.05
    c: float | None = None        # None: d / n of the input
    retry_budget: int = 20
    strict: bool = False

    def __post_init__(self):
        if self.K is not None and self.K < 2:
            raise DomainError("K must be at least 2")
        if not 0 < self.epsilon < 1:
            raise DomainError("epsilon must lie in (0, 1)")
        if self.retry_budget < 1:
            raise DomainError("retry_budget must be at least 1")
        if self.c is not None and self.strict and not 0 < self.epsilon < self.c - 0.5:
            raise DomainError(f"strict mode needs 0 < epsilon < c - 1/2, got c={self.c}")


@dataclass(frozen=True)
class Equipartition:
    """K^2 parts of each side; part k of A and part k of B have the same size."""

    parts_a: tuple[tuple[int, ...], ...]
    parts_b: tuple[tuple[int, ...], ...]


def part_sizes(n: int, parts: int) -> list[int]:
    q, rem = divmod(n, parts)
    return [q + 1] * rem + [q] * (parts - rem)


def random_equipartitions(n: int, K: int, seed=0) -> list[Equipartition]:
    """K independent uniform equipartitions of A and of B into K^2 parts each."""
    if K < 1:
        raise DomainError("K must be positive")
    parts = K * K
    if n < parts:
        raise DomainError(f"need n >= K^2, got n={n}, K={K}")
    rng = seed if isinstance(seed, random.Random) else rng_for(seed, "equipartition", n, K)
    sizes = part_sizes(n, parts)
    out = []
    for _ in range(K):
        sides = []
        for _side in range(2):
            perm = list(range(n))
            rng.shuffle(perm)
            chunks, pos = [], 0
            for sz in sizes:
                chunks.append(tuple(sorted(perm[pos:pos + sz])))
                pos += sz
            sides.append(tuple(chunks))
        out.append(Equipartition(sides[0], sides[1]))
    return out


def assignment_probabilities(K: int, epsilon: float) -> tuple[float, float]:
    """Per-index probabilities (into I_u ∪ I_v, elsewhere); they sum to 1 over K^3 indices."""
    p_in = epsilon / (2 * K)
    p_out = (1 - epsilon) / (K ** 3 - 2 * K)
    total = 2 * K * p_in + (K ** 3 - 2 * K) * p_out
    if not math.isclose(total, 1.0, rel_tol=0, abs_tol=1e-12):
        raise AssertionError(f"assignment probabilities sum to {total}")
    return p_in, p_out


@dataclass
class PartitionPlan:
    n: int
    d: int
    K: int
    c: float
    epsilon: float
    equipartitions: list[Equipartition]
    wa: list[int]                       # W_i ∩ A as a bitset over A
    wb: list[int]
    subgraphs: list[BipartiteDigraph]
    discarded_edges: int                # edges inside two or more reservoirs
    r: float = 0.0
    report: dict[str, Any] = field(default_factory=dict)
    degraded: bool = False
    attempts: int = 1

    @property
    def count(self) -> int:
        return len(self.subgraphs)

    def w_vertices(self, i: int) -> list[VertexId]:
        return ([VertexId(Side.A, x) for x in iter_bits(self.wa[i])]
                + [VertexId(Side.B, x) for x in iter_bits(self.wb[i])])

    def u_vertices(self, i: int) -> list[VertexId]:
        full = (1 << self.n) - 1
        return ([VertexId(Side.A, x) for x in iter_bits(full & ~self.wa[i])]
                + [VertexId(Side.B, x) for x in iter_bits(full & ~self.wb[i])])

    def to_json(self) -> str:
        return json.dumps(self.report, indent=2, sort_keys=True)


def _sample(D: BipartiteDigraph, K: int, epsilon: float, rng: random.Random):
    n = D.n_a
    parts = K * K
    eqs = random_equipartitions(n, K, rng)
    count = K ** 3
    wa, wb = [], []
    for eq in eqs:
        for k in range(parts):
            wa.append(bits_of(eq.parts_a[k]))
            wb.append(bits_of(eq.parts_b[k]))
    # reservoir index containing each vertex, per equipartition
    where_a = [[0] * n for _ in range(K)]
    where_b = [[0] * n for _ in range(K)]
    for i, eq in enumerate(eqs):
        for k in range(parts):
            for x in eq.parts_a[k]:
                where_a[i][x] = i * parts + k
            for x in eq.parts_b[k]:
                where_b[i][x] = i * parts + k
    assignment_probabilities(K, epsilon)
    all_idx = range(count)
    out_a = [[0] * n for _ in range(count)]
    out_b = [[0] * n for _ in range(count)]
    discarded = 0

    def spread(tail_w: list[int], head_w: list[int], row: int, table, tail: int):
        nonlocal discarded
        ones = twos = 0
        same = []
        for i in range(K):
            s_i = row & (wb[tail_w[i]] if table is out_a else wa[tail_w[i]])
            same.append(s_i)
            twos |= ones & s_i
            ones |= s_i
        discarded += twos.bit_count()
        single = ones & ~twos
        for i in range(K):
            hit = same[i] & single
            if hit:
                table[tail_w[i]][tail] |= hit
        reserved = set(tail_w)
        for head in iter_bits(row & ~ones):
            touched = reserved | {head_w_i[head] for head_w_i in head_w}
            if rng.random() < epsilon:
                j = rng.choice(sorted(touched))
            else:
                j = rng.choice([x for x in all_idx if x not in touched])
            table[j][tail] |= 1 << head

    for u in range(n):
        spread([where_a[i][u] for i in range(K)], where_b, D.out_a[u], out_a, u)
    for u in range(n):
        spread([where_b[i][u] for i in range(K)], where_a, D.out_b[u], out_b, u)
    subgraphs = [BipartiteDigraph(n, n, out_a[j], out_b[j]) for j in range(count)]
    return eqs, wa, wb, subgraphs, discarded


def _vertex_masks(plan_wa: list[int], plan_wb: list[int], v: VertexId) -> list[int]:
    """Bitsets (over the opposite side) of the reservoirs containing ``v``."""
    own = plan_wa if v.side is Side.A else plan_wb
    opp = plan_wb if v.side is Side.A else plan_wa
    return [opp[j] for j in range(len(own)) if own[j] >> v.index & 1]


def _check(name: str, ok: bool, measured, threshold, worst=None, **extra) -> dict:
    entry = {"pass": bool(ok), "measured": measured, "threshold": threshold}
    if isinstance(measured, (int, float)) and isinstance(threshold, (int, float)):
        entry["gap"] = float(measured) - float(threshold)
    if worst is not None:
        entry["worst"] = worst
    entry.update(extra)
    return entry


def verify_plan(D: BipartiteDigraph, plan: PartitionPlan, cfg: PartitionConfig | None = None) -> dict:
    """Recompute every structural and degree property of ``plan`` from its edge sets."""
    n, K = plan.n, plan.K
    count = plan.count
    d = D.regular_degree() or 0
    eps = plan.epsilon
    c = plan.c
    report: dict[str, Any] = {"n": n, "d": d, "K": K, "subgraphs": count, "epsilon": eps, "c": c}
    log_n = math.log(n)
    s = n / K ** 2
    vertices = list(D.vertices())

    # structural: disjointness, spanning, containment, conservation
    seen_a = [0] * n
    seen_b = [0] * n
    witness = None
    for j, h in enumerate(plan.subgraphs):
        if (h.n_a, h.n_b) != (n, n):
            witness = witness or f"H{j} is not spanning"
        for x in range(min(n, h.n_a)):
            clash = seen_a[x] & h.out_a[x]
            if clash and witness is None:
                witness = f"edge A{x}->B{(clash & -clash).bit_length() - 1} in two subgraphs (second: H{j})"
            seen_a[x] |= h.out_a[x]
        for x in range(min(n, h.n_b)):
            clash = seen_b[x] & h.out_b[x]
            if clash and witness is None:
                witness = f"edge B{x}->A{(clash & -clash).bit_length() - 1} in two subgraphs (second: H{j})"
            seen_b[x] |= h.out_b[x]
    report["edge_disjoint"] = _check("edge_disjoint", witness is None, 0 if witness is None else 1, 0,
                                     witness=witness)
    outside = sum((seen_a[x] & ~D.out_a[x]).bit_count() + (seen_b[x] & ~D.out_b[x]).bit_count()
                  for x in range(n))
    report["subgraph_of_input"] = _check("subgraph_of_input", outside == 0, outside, 0)
    full = (1 << n) - 1
    spanning = all((h.n_a, h.n_b) == (n, n) for h in plan.subgraphs) and all(
        0 < plan.wa[j] <= full and 0 < plan.wb[j] <= full for j in range(count))
    report["spanning"] = _check("spanning", spanning, int(spanning), 1)
    total_sub = sum(h.num_edges for h in plan.subgraphs)
    conserved = D.num_edges == total_sub + plan.discarded_edges
    report["edge_conservation"] = _check("edge_conservation", conserved, total_sub + plan.discarded_edges,
                                         D.num_edges, discarded=plan.discarded_edges, assigned=total_sub)
    I_sizes = {len(_vertex_masks(plan.wa, plan.wb, v)) for v in vertices}
    report["membership_count"] = _check("membership_count", I_sizes == {K}, sorted(I_sizes), K)
    try:
        assignment_probabilities(K, eps)
        prob_ok = True
    except AssertionError:
        prob_ok = False
    report["probability_identity"] = _check("probability_identity", prob_ok, int(prob_ok), 1)

    # (a) degree into every reservoir
    bound_a = 2 * math.sqrt(s * log_n)
    worst_a = (0.0, None)
    for v in vertices:
        for direction in ("out", "in"):
            row = D.nbits(v, direction)
            own = plan.wa if v.side is Side.A else plan.wb
            opp = plan.wb if v.side is Side.A else plan.wa
            for j in range(count):
                size = own[j].bit_count() + opp[j].bit_count()
                dev = abs((row & opp[j]).bit_count() - d * size / (2 * n))
                if dev > worst_a[0]:
                    worst_a = (dev, f"{v} {direction} into W{j}")
    report["a_reservoir_degree"] = _check("a", worst_a[0] <= bound_a, worst_a[0], bound_a, worst_a[1])

    # (b) edges coloured by i and another colour; (c) edges with at least one colour
    bound_b = s / math.log(s) if s > 1 else 0.0
    p_prime = 1 - (1 - 1 / K ** 2) ** K
    bound_c = 2 * math.sqrt(K ** 2 * s * log_n)
    worst_b = (0, None)
    y_sizes: list[tuple[int, str]] = []
    for v in vertices:
        masks = _vertex_masks(plan.wa, plan.wb, v)   # one per equipartition, in order
        if len(masks) != K:
            continue
        for direction in ("out", "in"):
            row = D.nbits(v, direction)
            union = 0
            for m in masks:
                union |= m
            y_sizes.append(((row & union).bit_count(), f"{v} {direction}"))
            for i in range(K):
                others = 0
                for j, m in enumerate(masks):
                    if j != i:
                        others |= m
                x_size = (row & masks[i] & others).bit_count()
                if x_size > worst_b[0]:
                    worst_b = (x_size, f"{v} {direction} colour {i}")
    report["b_multicoloured"] = _check("b", worst_b[0] <= bound_b, worst_b[0], bound_b, worst_b[1])
    # (c) is centred on the empirical mean; the analytic expectation is kept alongside
    y_emp = statistics.fmean(y for y, _ in y_sizes) if y_sizes else 0.0
    worst_c = max(((abs(y - y_emp), name) for y, name in y_sizes), default=(0.0, None))
    report["c_coloured_degree"] = _check(
        "c", worst_c[0] <= bound_c, worst_c[0], bound_c, worst_c[1],
        y_mean=y_emp, y_mean_expected=d * p_prime)

    # (P1) reservoir sizes
    target = n / K ** 2
    worst_p1 = max((max(abs(plan.wa[j].bit_count() - target), abs(plan.wb[j].bit_count() - target)), j)
                   for j in range(count))
    report["P1_sizes"] = _check("P1", worst_p1[0] < 1 + 1e-12, worst_p1[0], 1, f"W{worst_p1[1]}")

    # (P2) semidegrees of H_i[U_i] around the median r
    inner = []
    per_sub = []
    for j, h in enumerate(plan.subgraphs):
        ua, ub = full & ~plan.wa[j], full & ~plan.wb[j]
        degs = []
        for x in iter_bits(ua):
            degs.append(((h.out_a[x] & ub).bit_count(), (h.in_a[x] & ub).bit_count(), f"A{x}"))
        for x in iter_bits(ub):
            degs.append(((h.out_b[x] & ua).bit_count(), (h.in_b[x] & ua).bit_count(), f"B{x}"))
        per_sub.append(degs)
        for o, i_, _ in degs:
            inner.extend((o, i_))
    r = statistics.median(inner) if inner else 0.0
    window = r ** 0.6 if r > 0 else 0.0
    worst_p2 = (0.0, None)
    for j, degs in enumerate(per_sub):
        for o, i_, name in degs:
            for val in (o, i_):
                dev = abs(val - r)
                if dev > worst_p2[0]:
                    worst_p2 = (dev, f"{name} in H{j}[U{j}]")
    report["P2_inner_degrees"] = _check(
        "P2", r > 0 and worst_p2[0] <= window, worst_p2[0], window, worst_p2[1], r=r,
        r_ratio=r / (d / K ** 3) if d else 0.0,
        inner_min=min(inner) if inner else 0, inner_max=max(inner) if inner else 0)

    # (P3) degree from U_i into W_i inside H_i
    worst_p3 = (math.inf, None, 0.0)
    for j, h in enumerate(plan.subgraphs):
        wa, wb = plan.wa[j], plan.wb[j]
        thr = eps * (wa.bit_count() + wb.bit_count()) / (16 * K)
        for x in iter_bits(full & ~wa):
            val = min((h.out_a[x] & wb).bit_count(), (h.in_a[x] & wb).bit_count())
            if val - thr < worst_p3[0] - worst_p3[2]:
                worst_p3 = (val, f"A{x} into W{j}", thr)
        for x in iter_bits(full & ~wb):
            val = min((h.out_b[x] & wa).bit_count(), (h.in_b[x] & wa).bit_count())
            if val - thr < worst_p3[0] - worst_p3[2]:
                worst_p3 = (val, f"B{x} into W{j}", thr)
    report["P3_reservoir_access"] = _check("P3", worst_p3[0] >= worst_p3[2], worst_p3[0], worst_p3[2],
                                           worst_p3[1])

    # (P4) min semidegree inside each reservoir
    worst_p4 = (math.inf, None, 0.0)
    for j, h in enumerate(plan.subgraphs):
        wa, wb = plan.wa[j], plan.wb[j]
        thr = (c - eps) * (wa.bit_count() + wb.bit_count()) / 2
        vals = [min((h.out_a[x] & wb).bit_count(), (h.in_a[x] & wb).bit_count()) for x in iter_bits(wa)]
        vals += [min((h.out_b[x] & wa).bit_count(), (h.in_b[x] & wa).bit_count()) for x in iter_bits(wb)]
        low = min(vals) if vals else 0
        if low - thr < worst_p4[0] - worst_p4[2]:
            worst_p4 = (low, f"H{j}[W{j}]", thr)
    report["P4_reservoir_density"] = _check("P4", worst_p4[0] >= worst_p4[2], worst_p4[0], worst_p4[2],
                                            worst_p4[1])
    report["r"] = r
    return report


STRUCTURAL = ("edge_disjoint", "subgraph_of_input", "spanning", "edge_conservation",
              "membership_count", "probability_identity", "P1_sizes")
PROBABILISTIC = ("a_reservoir_degree", "b_multicoloured", "c_coloured_degree",
                 "P2_inner_degrees", "P3_reservoir_access", "P4_reservoir_density")


def failed_checks(report: dict) -> list[str]:
    return [k for k in STRUCTURAL + PROBABILISTIC if not report[k]["pass"]]


def _score(report: dict) -> tuple[int, float]:
    fails = failed_checks(report)
    shortfall = 0.0
    for k in fails:
        entry = report[k]
        scale = abs(entry["threshold"]) or 1.0
        shortfall += abs(entry.get("gap", 1.0)) / scale
    return len(fails), shortfall


def build_partition_plan(D: BipartiteDigraph, cfg: PartitionConfig = PartitionConfig(),
                         seed=0) -> PartitionPlan:
    """Sample, verify, and resample until every property holds or the budget runs out.

    In strict mode exhausting the budget raises ConstructionFailure carrying
    the best report; otherwise the best-scoring plan comes back ``degraded``.
    """
    if not D.balanced():
        raise DomainError("partition needs a balanced digraph")
    d = D.regular_degree()
    if d is None or d == 0:
        raise DomainError("partition needs a d-regular digraph with d >= 1")
    n = D.n_a
    K = cfg.K if cfg.K is not None else default_k(n)
    if n < K * K:
        raise DomainError(f"need n >= K^2, got n={n}, K={K}")
    c = cfg.c if cfg.c is not None else d / n
    if cfg.strict and not 0 < cfg.epsilon < c - 0.5:
        raise DomainError(f"strict mode needs 0 < epsilon < c - 1/2 (c = {c:.4f})")
    best = None
    for attempt in range(1, cfg.retry_budget + 1):
        rng = rng_for(seed, "partition", attempt)
        eqs, wa, wb, subgraphs, discarded = _sample(D, K, cfg.epsilon, rng)
        plan = PartitionPlan(n, d, K, c, cfg.epsilon, eqs, wa, wb, subgraphs, discarded, attempts=attempt)
        report = verify_plan(D, plan, cfg)
        plan.report = report
        plan.r = report["r"]
        failing = failed_checks(report)
        if any(k in STRUCTURAL for k in failing):
            raise AssertionError(f"partition construction broke a structural invariant: {failing}")
        if not failing:
            return plan
        if best is None or _score(report) < _score(best.report):
            best = plan
    best.degraded = True
    best.attempts = cfg.retry_budget
    best.report["failed"] = failed_checks(best.report)
    if cfg.strict:
        raise ConstructionFailure(
            f"partition properties {best.report['failed']} still failing after {cfg.retry_budget} attempts",
            best.report)
    return best
