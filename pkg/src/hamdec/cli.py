"""Command line entry point: ``hamdec generate|decompose|verify|oracle``."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .digraph import VertexId, read_edge_list, write_edge_list
from .errors import HamdecError
from .generators import (complete_bipartite, directed_four_cycle, diregular_tournament,
                         random_regular_bipartite_digraph)
from .pipeline import MODES, DecompositionConfig, decompose, stage_stats
from .verify import brute_force_max_disjoint_ham_cycles, is_ham_cycle, pairwise_edge_disjoint

FAMILIES = ("complete", "tournament", "regular", "four-cycle")


def write_cycle(path: Path, cycle) -> None:
    path.write_text("".join(f"{v}\n" for v in cycle))


def read_cycle(path: Path) -> list[VertexId]:
    return [VertexId.parse(tok) for tok in path.read_text().split()]


def cycle_files(directory: Path) -> list[Path]:
    return sorted(p for p in directory.glob("cycle_*.txt"))


def cmd_generate(args) -> int:
    if args.family == "complete":
        g = complete_bipartite(args.n)
    elif args.family == "tournament":
        g = diregular_tournament(args.n, seed=args.seed)
    elif args.family == "regular":
        if args.d is None:
            raise HamdecError("--d is required for the regular family")
        g = random_regular_bipartite_digraph(args.n, args.d, seed=args.seed)
    else:
        g = directed_four_cycle()
    write_edge_list(g, args.out)
    print(f"wrote {g.num_edges} edges on {g.n_a}+{g.n_b} vertices to {args.out}")
    return 0


def cmd_decompose(args) -> int:
    g = read_edge_list(args.input)
    cfg = DecompositionConfig(mode=args.mode, epsilon=args.epsilon, seed=args.seed)
    result = decompose(g, cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for old in cycle_files(out):
        old.unlink()
    width = max(3, len(str(len(result.cycles))))
    for k, cyc in enumerate(result.cycles):
        write_cycle(out / f"cycle_{k:0{width}d}.txt", cyc)
    report = stage_stats(result)
    (out / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True, default=str))
    print(f"{len(result.cycles)} cycles (d = {result.d}, fraction {result.achieved_fraction:.3f}) "
          f"written to {out}")
    return 0


def cmd_verify(args) -> int:
    g = read_edge_list(args.graph)
    files = cycle_files(Path(args.cycles))
    cycles = [read_cycle(p) for p in files]
    bad = []
    for p, cyc in zip(files, cycles):
        rep = is_ham_cycle(g, cyc)
        if not rep:
            bad.append({"file": p.name, **rep.to_dict()})
    disjoint = pairwise_edge_disjoint(cycles)
    ok = not bad and disjoint.ok
    print(json.dumps({"ok": ok, "cycles": len(cycles), "invalid": bad,
                      "disjoint": disjoint.to_dict()}, indent=2))
    return 0 if ok else 1


def cmd_oracle(args) -> int:
    g = read_edge_list(args.graph)
    if not args.max_disjoint:
        raise HamdecError("choose an oracle, e.g. --max-disjoint")
    count, family = brute_force_max_disjoint_ham_cycles(g)
    print(json.dumps({"max_disjoint_ham_cycles": count,
                      "witness": [[str(v) for v in c] for c in family]}, indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hamdec", description="Edge-disjoint Hamilton cycles "
                                     "in regular bipartite digraphs.")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a test digraph as an edge list")
    gen.add_argument("--family", choices=FAMILIES, required=True)
    gen.add_argument("--n", type=int, default=2)
    gen.add_argument("--d", type=int)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True)
    gen.set_defaults(func=cmd_generate)

    dec = sub.add_parser("decompose", help="find edge-disjoint Hamilton cycles")
    dec.add_argument("--in", dest="input", required=True)
    dec.add_argument("--mode", choices=MODES, default="practical")
    dec.add_argument("--epsilon", type=float, default=0.05)
    dec.add_argument("--seed", type=int, default=0)
    dec.add_argument("--out", required=True)
    dec.set_defaults(func=cmd_decompose)

    ver = sub.add_parser("verify", help="check cycle files against a graph")
    ver.add_argument("--graph", required=True)
    ver.add_argument("--cycles", required=True)
    ver.set_defaults(func=cmd_verify)

    orc = sub.add_parser("oracle", help="exhaustive answers for tiny graphs")
    orc.add_argument("--graph", required=True)
    orc.add_argument("--max-disjoint", action="store_true")
    orc.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (HamdecError, OSError) as exc:
        print(f"hamdec: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
