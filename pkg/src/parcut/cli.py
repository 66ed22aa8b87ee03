"""Command line frontend: solve, bound, generate, bench, and oracle."""

import argparse
import csv
import glob as globmod
import io
import json
import os
import sys
import time

from .generate import grid_graph, random_graph
from .graph import ParseError, parse_instance, serialize_instance
from .oracle import brute_force_optimum
from .solver import MODES, SolverConfig, solve


def _fail(message):
    print("error: %s" % message, file=sys.stderr)
    raise SystemExit(2)


def _resolve_threads(value):
    if value is not None:
        return value
    env = os.environ.get("MULTICUT_THREADS")
    if env:
        try:
            return int(env)
        except ValueError:
            _fail("MULTICUT_THREADS must be an integer, got %r" % env)
    return os.cpu_count() or 1


def _load_instance(path):
    try:
        with open(path, "rb") as fh:
            text = fh.read()
    except OSError as exc:
        _fail("cannot read %s: %s" % (path, exc))
    try:
        return parse_instance(text)
    except ParseError as exc:
        _fail("%s: %s" % (path, exc))


def _write_text(path, text):
    if path:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _config_from_args(args, mode=None):
    cfg = SolverConfig(
        mode=mode if mode is not None else args.mode,
        mp_iterations=args.mp_iterations,
        max_cycle_length=args.max_cycle_length,
        max_rounds=args.max_rounds,
        separation_rounds=getattr(args, "separation_rounds", 1),
        seed=args.seed,
        threads=_resolve_threads(args.threads),
    )
    try:
        cfg.validate()
    except ValueError as exc:
        _fail(str(exc))
    return cfg


def _report_json(instance_name, cfg, sol, wall_ms, omit_times):
    lb = sol.lower_bound
    finite = lb is not None and lb != float("-inf")
    trace = [
        {
            "round": rec.round_index,
            "phase": rec.phase,
            "nodes": rec.nodes,
            "edges": rec.edges,
            "triplets": rec.triplets,
            "lb": rec.lb,
            "lb_valid": rec.lb_valid,
            "contracted": rec.contracted,
            "time_ms": 0.0 if omit_times else rec.time_ms,
        }
        for rec in sol.trace
    ]
    report = {
        "instance": instance_name,
        "mode": cfg.mode,
        "config": {
            "mp_iterations": cfg.mp_iterations,
            "max_cycle_length": cfg.resolved_cycle_length(),
            "matching_switch_fraction": cfg.matching_switch_fraction,
            "max_rounds": cfg.max_rounds,
            "separation_rounds": cfg.separation_rounds,
        },
        "primal_cost": sol.primal_cost,
        "lower_bound": lb if finite else None,
        "gap": (sol.primal_cost - lb) if finite else None,
        "node_labels": sol.labeling.tolist(),
        "trace": trace,
        "wall_time_ms": 0.0 if omit_times else wall_ms,
        "seed": cfg.seed,
        "threads": cfg.threads,
    }
    return json.dumps(report, indent=2, sort_keys=True) + "\n"


def cmd_solve(args, mode=None):
    g = _load_instance(args.input)
    cfg = _config_from_args(args, mode=mode)
    t0 = time.perf_counter()
    sol = solve(g, cfg)
    wall_ms = (time.perf_counter() - t0) * 1000.0
    text = _report_json(args.input, cfg, sol, wall_ms, args.omit_times)
    _write_text(args.output, text)
    return 0


def cmd_bound(args):
    return cmd_solve(args, mode="D")


def cmd_generate(args):
    try:
        if args.type == "random":
            g = random_graph(args.num_nodes, args.edge_probability, args.seed)
        else:
            g = grid_graph(args.height, args.width, args.stride, args.seed)
    except ValueError as exc:
        _fail(str(exc))
    _write_text(args.output, serialize_instance(g))
    return 0


def cmd_bench(args):
    paths = sorted(globmod.glob(args.input))
    if not paths:
        _fail("no instances match %r" % args.input)
    modes = [m.strip() for m in args.modes.split(",") if m.strip()]
    for m in modes:
        if m not in MODES:
            _fail("unknown mode %r in --modes" % m)
    # load everything first so a bad file aborts before any output
    graphs = [(p, _load_instance(p)) for p in paths]
    rows = []
    per_mode = {m: [] for m in modes}
    for path, g in graphs:
        for m in modes:
            cfg = _config_from_args(args, mode=m)
            t0 = time.perf_counter()
            sol = solve(g, cfg)
            ms = (time.perf_counter() - t0) * 1000.0
            lb = sol.lower_bound
            finite = lb != float("-inf")
            rows.append(
                [path, m, repr(sol.primal_cost), repr(lb) if finite else "", "%.3f" % ms]
            )
            per_mode[m].append((sol.primal_cost, lb if finite else None, ms))
    for m in modes:
        entries = per_mode[m]
        primal = sum(e[0] for e in entries) / len(entries)
        lbs = [e[1] for e in entries]
        lb_mean = "" if any(b is None for b in lbs) else repr(sum(lbs) / len(lbs))
        ms_mean = sum(e[2] for e in entries) / len(entries)
        rows.append(["MEAN", m, repr(primal), lb_mean, "%.3f" % ms_mean])
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["instance", "mode", "primal_cost", "lower_bound", "time_ms"])
    writer.writerows(rows)
    _write_text(args.output, buf.getvalue())
    return 0


def cmd_oracle(args):
    g = _load_instance(args.input)
    try:
        result = brute_force_optimum(g)
    except ValueError as exc:
        _fail(str(exc))
    payload = {
        "optimum": result.optimum_cost,
        "labeling": result.optimum_labeling.tolist(),
    }
    _write_text(args.output, json.dumps(payload, indent=2, sort_keys=True) + "\n")
    return 0


def _add_io_args(p, input_required=True):
    p.add_argument("-i", "--input", required=input_required, help="instance file")
    p.add_argument("-o", "--output", default=None, help="output file (default stdout)")


def _add_solver_args(p, with_mode=True):
    if with_mode:
        p.add_argument("--mode", default="PD", choices=MODES, help="solver mode")
    p.add_argument("--mp-iterations", type=int, default=5, metavar="K",
                   help="message passing iterations per round")
    p.add_argument("--max-cycle-length", type=int, default=None, metavar="L",
                   help="cycle length bound (default 5, or 7 for PD+)")
    p.add_argument("--max-rounds", type=int, default=100, metavar="R",
                   help="contraction round limit")
    p.add_argument("--separation-rounds", type=int, default=1, metavar="N",
                   help="separation rounds in mode D")
    p.add_argument("--threads", type=int, default=None, metavar="T",
                   help="thread budget (default: MULTICUT_THREADS or machine)")
    p.add_argument("--seed", type=int, default=0, metavar="S", help="random seed")
    p.add_argument("--omit-times", action="store_true",
                   help="zero all wall times in the report, for byte-stable output")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="parcut",
        description="Parallel primal-dual solver for minimum-cost multicut.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="solve an instance, write a JSON report")
    _add_io_args(p_solve)
    _add_solver_args(p_solve)
    p_solve.set_defaults(func=cmd_solve)

    p_bound = sub.add_parser("bound", help="dual lower bound only (mode D)")
    _add_io_args(p_bound)
    _add_solver_args(p_bound, with_mode=False)
    p_bound.set_defaults(func=cmd_bound)

    p_gen = sub.add_parser("generate", help="write a synthetic instance")
    p_gen.add_argument("--type", choices=("random", "grid"), default="random")
    p_gen.add_argument("-n", "--num-nodes", type=int, default=10)
    p_gen.add_argument("-p", "--edge-probability", type=float, default=0.5)
    p_gen.add_argument("--height", type=int, default=4)
    p_gen.add_argument("--width", type=int, default=4)
    p_gen.add_argument("--stride", type=int, default=0)
    p_gen.add_argument("--seed", type=int, default=0)
    p_gen.add_argument("-o", "--output", default=None)
    p_gen.set_defaults(func=cmd_generate)

    p_bench = sub.add_parser("bench", help="run a mode matrix over a glob of instances")
    p_bench.add_argument("-i", "--input", required=True, help="glob pattern")
    p_bench.add_argument("-o", "--output", default=None, help="CSV output (default stdout)")
    p_bench.add_argument("--modes", default="P,PD", help="comma separated mode list")
    _add_solver_args(p_bench, with_mode=False)
    p_bench.set_defaults(func=cmd_bench)

    p_oracle = sub.add_parser("oracle", help="exact optimum by enumeration (small instances)")
    _add_io_args(p_oracle)
    p_oracle.set_defaults(func=cmd_oracle)

    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
