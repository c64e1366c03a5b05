"""``lagroute`` command line: route, sweep, oracle, bench, speedup."""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import re
import sys
import time
from pathlib import Path

from . import __version__
from .grid import InvalidInstanceError
from .netlist import Instance, generate_random, parse_instance
from .oracle import OracleLimitError, exact_route
from .report import build_report, solution_row, to_csv
from .router import RouterConfig, measure_speedup, solve, unconstrained_channel_width

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_INFEASIBLE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _router_flags(p: argparse.ArgumentParser):
    p.add_argument("--method", choices=["primal-dual", "projected", "deflected"], default="primal-dual")
    p.add_argument("--step", choices=["kkt", "paralar"], default="kkt")
    p.add_argument("--beta", type=float, default=0.6, help="deflection weight for --method deflected")
    p.add_argument("--kkt-operator", choices=["violation", "subgradient"], default="violation")
    p.add_argument("--iterations", type=int, default=50, help="sub-gradient iterations per W")
    p.add_argument("--w-init", type=int, default=None)
    p.add_argument("--sweep", action="store_true", help="lower W while routing stays violation-free")
    p.add_argument("--warm-start-lambda", action="store_true")
    p.add_argument("--threads", type=int, default=None, help="worker threads (env LAGROUTE_THREADS)")
    p.add_argument("--seed", type=int, default=None)


def _output_flags(p: argparse.ArgumentParser):
    p.add_argument("--report", type=Path, default=None, help="output path (default: stdout)")
    p.add_argument("--format", choices=["json", "csv"], default="json")


def _build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="lagroute", description=__doc__)
    parser.add_argument("--version", action="version", version=f"lagroute {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    for name, help_ in (("route", "route one instance"), ("sweep", "route with a downward W sweep")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--instance", type=Path, required=True)
        _router_flags(p)
        _output_flags(p)

    p = sub.add_parser("oracle", help="exact optimum of a tiny instance (test fixtures)")
    p.add_argument("--instance", type=Path, required=True)
    p.add_argument("--width", type=int, default=None, help="width constraint (default: instance W)")
    p.add_argument("--report", type=Path, default=None)

    p = sub.add_parser("bench", help="compare router variants on seeded synthetic instances")
    p.add_argument("--suite", default="seeds=1..20", help="seeds=A..B or seeds=1,2,5")
    p.add_argument("--grid", default="30x30")
    p.add_argument("--nets", type=int, default=200)
    p.add_argument("--terminals", default="2..4", help="terminals per net, inclusive range")
    p.add_argument("--compare", default="projected:paralar,primal-dual:kkt",
                   help="comma list of METHOD[:STEP] variants")
    _router_flags(p)
    _output_flags(p)

    p = sub.add_parser("speedup", help="wall time versus thread count")
    p.add_argument("--instance", type=Path, default=None, help="default: generated from --grid/--nets/--seed")
    p.add_argument("--grid", default="50x50")
    p.add_argument("--nets", type=int, default=500)
    p.add_argument("--terminals", default="2..6")
    p.add_argument("--thread-counts", default="1,2,3,4")
    p.add_argument("--repeats", type=int, default=1)
    _router_flags(p)
    _output_flags(p)
    return parser


def _range(text: str, what: str) -> list[int]:
    m = re.fullmatch(r"\s*(\d+)\s*\.\.\s*(\d+)\s*", text)
    if m:
        lo, hi = int(m.group(1)), int(m.group(2))
        if hi < lo:
            raise UsageError(f"empty {what} range {text!r}")
        return list(range(lo, hi + 1))
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"cannot parse {what} {text!r}") from None


def _dims(text: str) -> tuple[int, int]:
    m = re.fullmatch(r"(\d+)x(\d+)", text.strip())
    if not m:
        raise UsageError(f"--grid expects ROWSxCOLS, got {text!r}")
    return int(m.group(1)), int(m.group(2))


def _threads(args) -> int:
    if args.threads is not None:
        return args.threads
    env = os.environ.get("LAGROUTE_THREADS")
    if env:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"LAGROUTE_THREADS must be an integer, got {env!r}") from None
    return 1


def _config(args, **overrides) -> RouterConfig:
    values = dict(
        method=args.method, step=args.step, beta=args.beta, max_iterations=args.iterations,
        w_init=args.w_init, w_sweep=args.sweep, warm_start_lambda=args.warm_start_lambda,
        thread_count=_threads(args), seed=args.seed, kkt_operator=args.kkt_operator,
    )
    values.update(overrides)
    try:
        return RouterConfig(**values)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _load(path: Path) -> Instance:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InvalidInstanceError(f"cannot read instance file {path}: {exc.strerror or exc}") from None
    try:
        return parse_instance(text)
    except InvalidInstanceError as exc:
        raise InvalidInstanceError(f"{path}: {exc}") from None


def _emit(report: dict, args):
    text = to_csv(report) if getattr(args, "format", "json") == "csv" else json.dumps(report, indent=2) + "\n"
    if args.report is None:
        sys.stdout.write(text)
    else:
        args.report.write_text(text, encoding="utf-8")


def _cmd_route(args, sweep: bool) -> int:
    inst = _load(args.instance)
    cfg = _config(args, w_sweep=sweep or args.sweep)
    t0 = time.perf_counter()
    sol = solve(inst, cfg)
    elapsed = time.perf_counter() - t0
    row = solution_row(args.instance.stem, inst, sol, elapsed)
    _emit(build_report("sweep" if cfg.w_sweep else "route", cfg, [row]), args)
    if sol.infeasible_at_w_init or (not cfg.w_sweep and sol.total_violation > 0):
        print(f"lagroute: routing violates W={sol.width} (total violation {sol.total_violation})", file=sys.stderr)
        return EXIT_INFEASIBLE
    return EXIT_OK


def _cmd_oracle(args) -> int:
    inst = _load(args.instance)
    try:
        res = exact_route(inst, width=args.width)
    except OracleLimitError as exc:
        raise UsageError(f"instance too large for the oracle: {exc}") from None
    fixture = {
        "tool": "lagroute",
        "version": __version__,
        "instance": args.instance.name,
        "instance_hash": inst.digest(),
        "width": res.width,
        "optimal_wirelength": None if res.optimal_wirelength == float("inf") else res.optimal_wirelength,
        "min_channel_width": res.min_channel_width,
        "per_net_optimal": list(res.per_net_optimal),
        "witness": [[[list(a), list(b)] for a, b in t.edges] for t in res.witness],
    }
    text = json.dumps(fixture, indent=2) + "\n"
    if args.report is None:
        sys.stdout.write(text)
    else:
        args.report.write_text(text, encoding="utf-8")
    return EXIT_OK


def _variants(text: str, default_step: str) -> list[tuple[str, str]]:
    out = []
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        method, _, step = item.partition(":")
        step = step or default_step
        if method not in ("primal-dual", "projected", "deflected") or step not in ("kkt", "paralar"):
            raise UsageError(f"bad variant {item!r}; expected METHOD[:STEP]")
        out.append((method, step))
    if not out:
        raise UsageError("--compare lists no variants")
    return out


def _cmd_bench(args) -> int:
    seeds_spec = args.suite.partition("=")
    if seeds_spec[0].strip() != "seeds" or not seeds_spec[2]:
        raise UsageError(f"--suite expects seeds=A..B, got {args.suite!r}")
    seeds = _range(seeds_spec[2], "seed")
    rows_n, cols_n = _dims(args.grid)
    terms = _range(args.terminals, "terminal")
    variants = _variants(args.compare, args.step)
    base = _config(args)
    rows = []
    summary = {}
    for seed in seeds:
        inst = generate_random(rows_n, cols_n, args.nets, (min(terms), max(terms)), seed=seed)
        w_init = args.w_init if args.w_init is not None else unconstrained_channel_width(inst)
        name = f"rand-{rows_n}x{cols_n}-n{args.nets}-s{seed}"
        for method, step in variants:
            cfg = dataclasses.replace(base, method=method, step=step, w_init=w_init, seed=seed)
            t0 = time.perf_counter()
            sol = solve(inst, cfg)
            elapsed = time.perf_counter() - t0
            label = f"{method}:{step}"
            rows.append(solution_row(name, inst, sol, elapsed, variant=label, history=False))
            agg = summary.setdefault(label, {"wirelength": 0.0, "total_violation": 0, "achieved_W": 0,
                                             "channel_width": 0, "wall_time": 0.0})
            agg["wirelength"] += sol.wirelength
            agg["total_violation"] += sol.total_violation
            agg["achieved_W"] += sol.achieved_W or 0
            agg["channel_width"] += sol.channel_width
            agg["wall_time"] += elapsed
    _emit(build_report("bench", base, rows, extra={"summary": summary}), args)
    return EXIT_OK


def _cmd_speedup(args) -> int:
    if args.instance is not None:
        inst = _load(args.instance)
        name = args.instance.stem
    else:
        r, c = _dims(args.grid)
        terms = _range(args.terminals, "terminal")
        seed = args.seed if args.seed is not None else 0
        inst = generate_random(r, c, args.nets, (min(terms), max(terms)), seed=seed)
        name = f"rand-{r}x{c}-n{args.nets}-s{seed}"
    counts = _range(args.thread_counts, "thread count")
    if not counts or min(counts) < 1:
        raise UsageError("--thread-counts must list integers >= 1")
    cfg = _config(args)
    if cfg.w_init is None and args.instance is None:
        cfg = dataclasses.replace(cfg, w_init=unconstrained_channel_width(inst))
    table = measure_speedup(inst, cfg, counts, repeats=args.repeats)
    sol = solve(inst, cfg)
    row = solution_row(name, inst, sol, table[0].wall_time, history=False)
    _emit(build_report("speedup", cfg, [row], speedup=table), args)
    return EXIT_OK


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command in ("route", "sweep"):
            return _cmd_route(args, args.command == "sweep")
        if args.command == "oracle":
            return _cmd_oracle(args)
        if args.command == "bench":
            return _cmd_bench(args)
        return _cmd_speedup(args)
    except UsageError as exc:
        print(f"lagroute: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InvalidInstanceError as exc:
        print(f"lagroute: error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)


if __name__ == "__main__":
    sys.exit(main())
