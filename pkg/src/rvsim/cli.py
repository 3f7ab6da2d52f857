"""Command-line front end.

Subcommands: ``generate`` (graph files), ``run`` (single simulation),
``sweep`` (parameter grids to CSV), ``lowerbound`` (worst-case instance
construction and verification), ``selfcheck`` (the acceptance gate).
Every path is deterministic given its flags; exit codes are 0 for
success/claims-hold, 1 for claim violations, 2 for usage or input errors.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from concurrent.futures import ProcessPoolExecutor

from . import acceptance
from .acceptance import SWEEP_COLUMNS, Cell, run_cell
from .adversary import HorizonViolatedError, build_instance, verify_frozen_distance
from .agents import default_round_cap, rendezvous_program, rendezvous_round_bound
from .graphs import (GraphError, butterfly_index, generate_butterfly,
                     generate_caterpillar, generate_random_connected,
                     generate_ring, load_graph, save_graph)
from .oracle import bfs_distances
from .sim import MET, SimConfig, run, trace_header, write_trace


def _ints(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x != ""]


def _label_pairs(text: str) -> list[tuple[int, int]]:
    pairs = []
    for chunk in text.split(","):
        if not chunk:
            continue
        a, _, b = chunk.partition(":")
        pairs.append((int(a), int(b)))
    return pairs


def _label_space(text: str) -> int:
    """Accept plain integers plus 2^k / 2**k shorthand."""
    text = text.strip()
    for sep in ("^", "**"):
        if sep in text:
            base, _, exp = text.partition(sep)
            return int(base) ** int(exp)
    return int(text)


def _emit(pairs) -> None:
    print(" ".join(f"{k}={v}" for k, v in pairs))


# ----------------------------------------------------------------------------
# generate
# ----------------------------------------------------------------------------

_FAMILY_FLAGS = {
    "caterpillar": ("spine_length", "degree"),
    "butterfly": ("clique_size", "columns"),
    "ring": ("size",),
    "random": ("size", "max_degree"),
}


def _require_family_flags(args) -> None:
    missing = [name for name in _FAMILY_FLAGS[args.family]
               if getattr(args, name) is None]
    if missing:
        flags = ", ".join("--" + name.replace("_", "-") for name in missing)
        raise ValueError(f"family {args.family!r} needs {flags}")


def cmd_generate(args) -> int:
    family = args.family
    _require_family_flags(args)
    starts = None
    if family == "caterpillar":
        cat = generate_caterpillar(args.spine_length, args.degree, args.policy, args.seed)
        g, starts = cat.graph, (cat.start1, cat.start2)
    elif family == "butterfly":
        g = generate_butterfly(args.clique_size, args.columns)
        starts = (butterfly_index(args.clique_size, 0, 0),
                  butterfly_index(args.clique_size, 0, args.columns // 2))
    elif family == "ring":
        g = generate_ring(args.size, args.numbering, args.seed)
    else:
        g = generate_random_connected(args.size, args.max_degree, args.seed)
    save_graph(g, args.out)
    out = [("family", family), ("n", g.num_nodes), ("m", g.num_edges),
           ("max_degree", g.max_degree)]
    if starts is not None:
        out += [("start1", starts[0]), ("start2", starts[1])]
    out.append(("out", args.out))
    _emit(out)
    return 0


# ----------------------------------------------------------------------------
# run
# ----------------------------------------------------------------------------

def cmd_run(args) -> int:
    g = load_graph(args.graph)
    start_distance = bfs_distances(g, args.start1)[args.start2]
    cap = args.round_cap or default_round_cap(g.max_degree, start_distance,
                                              args.label1, args.label2)
    analytic = rendezvous_round_bound(g.max_degree, start_distance,
                                      args.label1, args.label2)
    cfg = SimConfig(round_cap=cap, oracle_mode=args.oracle_mode,
                    trace_detail="full" if args.trace_out else "meeting-only")
    result = run(g, args.start1, args.start2,
                 rendezvous_program(args.label1), rendezvous_program(args.label2), cfg)
    if args.trace_out:
        with open(args.trace_out, "w", encoding="ascii") as fh:
            write_trace(fh, trace_header(g, args.start1, args.start2,
                                         args.label1, args.label2, cfg), result)
    out = [("outcome", result.outcome),
           ("met_round", "" if result.met_round is None else result.met_round),
           ("rounds", result.rounds), ("start_distance", start_distance),
           ("round_cap", cap), ("analytic_cap", analytic),
           ("final1", result.final1), ("final2", result.final2),
           ("min_distance", result.min_distance)]
    if result.met:
        out.append(("bound_ratio", f"{result.rounds / analytic:.6f}"))
    _emit(out)
    return 0 if result.met else 1


# ----------------------------------------------------------------------------
# sweep
# ----------------------------------------------------------------------------

def _sweep_cells(args) -> list[Cell]:
    if args.label_pairs:
        pairs = _label_pairs(args.label_pairs)
    else:
        lo, _, hi = args.label_range.partition(":")
        labels = range(int(lo), int(hi))
        pairs = [(a, b) for i, a in enumerate(labels) for b in labels[i + 1:]]
    mode = args.oracle_mode
    cells: list[Cell] = []
    if args.family == "caterpillar":
        for spine in _ints(args.spine_lengths):
            for degree in _ints(args.degrees):
                for policy in args.policies.split(","):
                    for seed in _ints(args.seeds):
                        for l1, l2 in pairs:
                            # designated starts: the two spine endpoints
                            cells.append(Cell(
                                "caterpillar",
                                (("spine_length", spine), ("degree", degree),
                                 ("policy", policy), ("seed", seed)),
                                0, spine, l1, l2, mode))
    elif args.family == "butterfly":
        for k in _ints(args.clique_sizes):
            for cols in _ints(args.columns):
                s1 = butterfly_index(k, 0, 0)
                s2 = butterfly_index(k, 0, cols // 2)
                for l1, l2 in pairs:
                    cells.append(Cell("butterfly",
                                      (("clique_size", k), ("columns", cols)),
                                      s1, s2, l1, l2, mode))
    elif args.family == "ring":
        for n in _ints(args.sizes):
            for seed in _ints(args.seeds):
                rotations = range(n) if args.rotations == 0 else range(min(args.rotations, n))
                for rot in rotations:
                    for l1, l2 in pairs:
                        cells.append(Cell(
                            "ring",
                            (("size", n), ("numbering", args.numbering), ("seed", seed)),
                            rot, (rot + n // 2) % n, l1, l2, mode))
    else:  # random; start2 = -1 resolves to the farthest node from start1
        for n in _ints(args.sizes):
            for cap in _ints(args.max_degrees):
                for seed in _ints(args.seeds):
                    for l1, l2 in pairs:
                        cells.append(Cell(
                            "random",
                            (("size", n), ("max_degree", cap), ("seed", seed)),
                            0, -1, l1, l2, mode))
    return sorted(cells, key=Cell.sort_key)


def cmd_sweep(args) -> int:
    if bool(args.label_pairs) == bool(args.label_range):
        print("exactly one of --label-pairs or --label-range is required",
              file=sys.stderr)
        return 2
    cells = _sweep_cells(args)
    repeat = max(1, args.repeat)
    jobs = args.jobs or os.cpu_count() or 1
    work = cells * repeat  # repeats grouped by position: work[i::len(cells)]
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(run_cell, work, chunksize=8))
    else:
        results = [run_cell(c) for c in work]

    rows = results[:len(cells)]
    unstable = 0
    for rep in range(1, repeat):
        chunk = results[rep * len(cells):(rep + 1) * len(cells)]
        unstable += sum(1 for a, b in zip(rows, chunk) if a != b)

    with open(args.out, "w", encoding="ascii", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=SWEEP_COLUMNS)
        writer.writeheader()
        writer.writerows(rows)

    met = sum(1 for r in rows if r["outcome"] == MET)
    errors = sum(1 for r in rows if r["outcome"] == "error")
    ratios = [float(r["bound_ratio"]) for r in rows if r["bound_ratio"]]
    max_ratio = max(ratios, default=0.0)
    max_rounds = max((r["rounds"] for r in rows if r["rounds"] != ""), default=0)
    _emit([("cells", len(rows)), ("repeat", repeat), ("met", met),
           ("errors", errors), ("unstable", unstable),
           ("max_bound_ratio", f"{max_ratio:.6f}"), ("max_rounds", max_rounds),
           ("out", args.out)])
    claims_hold = met == len(rows) and max_ratio <= 1.0 and unstable == 0
    return 0 if claims_hold else 1


# ----------------------------------------------------------------------------
# lowerbound
# ----------------------------------------------------------------------------

def cmd_lowerbound(args) -> int:
    if args.degree is None and args.clique_size is None:
        print("one of --degree or --clique-size is required", file=sys.stderr)
        return 2
    degree = args.degree if args.degree is not None else args.clique_size + 3
    inst = build_instance(rendezvous_program, degree=degree,
                          label_space=args.label_space, distance=args.distance,
                          sample_size=args.sample_size, seed=args.seed)
    if args.graph_out:
        save_graph(inst.graph, args.graph_out)
    try:
        verified = verify_frozen_distance(inst)
        violated = False
    except HorizonViolatedError as exc:
        verified = -1
        violated = True
        print(f"horizon violated: {exc}", file=sys.stderr)
    _emit([("degree", inst.degree), ("clique_size", inst.clique_size),
           ("columns", inst.columns), ("distance", inst.distance),
           ("label_space", inst.label_space),
           ("labels_examined", inst.labels_examined), ("sampled", inst.sampled),
           ("p1", inst.p1), ("p2", inst.p2),
           ("label1", inst.label1), ("label2", inst.label2),
           ("t_star", inst.agreement_horizon),
           ("t_min", inst.guaranteed_horizon),
           ("verified_horizon", verified)])
    ok = not violated and verified >= inst.agreement_horizon >= inst.guaranteed_horizon
    return 0 if ok else 1


def cmd_selfcheck(args) -> int:
    results = acceptance.run_all(fast=args.fast)
    for res in results:
        print(res.line())
    return 0 if all(r.passed for r in results) else 1


# ----------------------------------------------------------------------------
# parser
# ----------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rvsim",
        description="Two distance-aware agents meeting on anonymous port-labelled graphs.")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="write a graph file")
    gen.add_argument("--family", required=True,
                     choices=("caterpillar", "butterfly", "ring", "random"))
    gen.add_argument("--spine-length", type=int, help="caterpillar spine length")
    gen.add_argument("--degree", type=int, help="caterpillar uniform degree")
    gen.add_argument("--policy", default="adversarial",
                     choices=("adversarial", "random"), help="caterpillar ports")
    gen.add_argument("--clique-size", type=int, help="clique ring: odd clique size")
    gen.add_argument("--columns", type=int, help="clique ring: number of columns")
    gen.add_argument("--size", type=int, help="ring/random node count")
    gen.add_argument("--numbering", default="uniform", choices=("uniform", "random"),
                     help="ring ports")
    gen.add_argument("--max-degree", type=int, help="random graph degree cap")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True)
    gen.set_defaults(func=cmd_generate)

    runp = sub.add_parser("run", help="simulate one rendezvous")
    runp.add_argument("--graph", required=True)
    runp.add_argument("--start1", type=int, required=True)
    runp.add_argument("--start2", type=int, required=True)
    runp.add_argument("--label1", type=int, required=True)
    runp.add_argument("--label2", type=int, required=True)
    runp.add_argument("--oracle-mode", default="exact", choices=("exact", "delta"))
    runp.add_argument("--round-cap", type=int, default=0,
                      help="0 = derived from degree, distance, and labels")
    runp.add_argument("--trace-out", help="write the full JSONL trace here")
    runp.set_defaults(func=cmd_run)

    sweep = sub.add_parser(
        "sweep", help="run a parameter grid to CSV",
        description="CSV columns, in order: " + ", ".join(SWEEP_COLUMNS))
    sweep.add_argument("--family", required=True,
                       choices=("caterpillar", "butterfly", "ring", "random"))
    sweep.add_argument("--spine-lengths", default="", help="comma list (caterpillar)")
    sweep.add_argument("--degrees", default="", help="comma list (caterpillar)")
    sweep.add_argument("--policies", default="adversarial", help="comma list (caterpillar)")
    sweep.add_argument("--clique-sizes", default="", help="comma list (butterfly)")
    sweep.add_argument("--columns", default="", help="comma list (butterfly)")
    sweep.add_argument("--sizes", default="", help="comma list (ring/random)")
    sweep.add_argument("--numbering", default="random", choices=("uniform", "random"),
                       help="ring ports")
    sweep.add_argument("--rotations", type=int, default=0,
                       help="ring start rotations to try; 0 = all")
    sweep.add_argument("--max-degrees", default="", help="comma list (random)")
    sweep.add_argument("--seeds", default="0", help="comma list")
    sweep.add_argument("--label-pairs", default="", help="e.g. 0:1,2:5")
    sweep.add_argument("--label-range", default="",
                       help="lo:hi -> every unordered label pair in [lo, hi)")
    sweep.add_argument("--oracle-mode", default="exact", choices=("exact", "delta"))
    sweep.add_argument("--repeat", type=int, default=1,
                       help="re-run each cell this many times; divergence is a violation")
    sweep.add_argument("--out", required=True)
    sweep.add_argument("--jobs", type=int, default=0, help="0 = all cores")
    sweep.set_defaults(func=cmd_sweep)

    low = sub.add_parser("lowerbound", help="build and verify a frozen-distance instance")
    low.add_argument("--degree", type=int, help="uniform degree (odd clique size + 3)")
    low.add_argument("--clique-size", type=int, help="alternative to --degree")
    low.add_argument("--label-space", type=_label_space, required=True,
                     help="integer, or 2^k / 2**k")
    low.add_argument("--distance", type=int, required=True)
    low.add_argument("--sample-size", type=int,
                     help="sample this many labels (default: explicit up to 2^20, else 1024)")
    low.add_argument("--seed", type=int, default=0)
    low.add_argument("--graph-out", help="also write the numbered graph file")
    low.set_defaults(func=cmd_lowerbound)

    check = sub.add_parser("selfcheck", help="run the acceptance suite")
    check.add_argument("--fast", action="store_true",
                       help="smoke variant: shrinks the explicit label-space case")
    check.set_defaults(func=cmd_selfcheck)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except GraphError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
