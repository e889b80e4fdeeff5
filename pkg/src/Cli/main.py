"""
Cli Module - Command-Line Front End

This module handles:
1. solve      -> SolveReport JSON (mult, add or wbb), optional JSON-lines trace
2. curvature  -> CurvatureReport JSON for one valuation and width
3. gap-gen    -> integrality-gap instance, its spec and the verification report
4. oracle     -> brute-force optimum JSON
5. bench      -> CSV table over a seeded batch of instances

Exit codes: 0 on success, 2 on invalid input, 3 on an internal invariant violation.
Reports go to stdout unless --out is given; diagnostics go to stderr.
"""

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Dict, List, Optional

import config
from config import DEFAULT_EPSILON, DEFAULT_OMEGA, MAX_DENOMINATOR
from src.Cli.bench import SUITES, run_bench, transform_bench_results
from src.Curvature.main import curvature
from src.errors import InvariantViolation
from src.Instance.gap import gen_gap_instance
from src.Instance.main import load_instance
from src.main import MODES, solve_instance
from src.Oracle.main import brute_force_opt, verify_gap_certificate
from src.Solvers.report import trace_lines
from src.Valuations.main import valuation_from_dict

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_INVARIANT = 3


def _emit(payload: Dict, out: Optional[str]) -> None:
    text = json.dumps(payload, indent=2)
    if out:
        Path(out).write_text(text + "\n")
        logger.info(f"wrote {out}")
    else:
        sys.stdout.write(text + "\n")


def _load_valuation(path: str):
    with open(path, "r") as f:
        data = json.load(f)
    # accept a bare descriptor or {"valuation": {...}}
    if isinstance(data, dict) and "family" not in data and "valuation" in data:
        return valuation_from_dict(data["valuation"], "valuation")
    return valuation_from_dict(data, "valuation")


def cmd_solve(args: argparse.Namespace) -> int:
    instance = load_instance(args.instance)
    report = solve_instance(instance, mode=args.mode, epsilon=args.epsilon, omega=args.omega,
                            mu=args.mu, trace=bool(args.trace))
    if args.trace:
        Path(args.trace).write_text("".join(line + "\n" for line in trace_lines(report.trace)))
    _emit(report.to_dict(), args.out)
    return EXIT_OK


def cmd_curvature(args: argparse.Namespace) -> int:
    v = _load_valuation(args.valuation)
    kwargs = {"method": args.method}
    if args.z_max is not None:
        kwargs["z_max_bound"] = args.z_max
    report = curvature(v, args.width, args.kind, **kwargs)
    _emit(report.to_dict(), args.out)
    return EXIT_OK


def cmd_gap_gen(args: argparse.Namespace) -> int:
    v = _load_valuation(args.valuation)
    instance, spec = gen_gap_instance(v, args.width, max_denominator=args.max_denominator)
    verification = verify_gap_certificate(spec, instance)
    _emit({"instance": instance.to_dict(), "spec": spec.to_dict(), "verification": verification}, args.out)
    return EXIT_OK if verification["passed"] else EXIT_INVARIANT


def cmd_oracle(args: argparse.Namespace) -> int:
    instance = load_instance(args.instance)
    value, allocation = brute_force_opt(instance, objective=args.objective, omega=args.omega)
    _emit({
        "objective": args.objective,
        "omega": args.omega,
        "value": value,
        "allocation": allocation.to_dict(),
        "utilities": allocation.utilities(instance).tolist(),
    }, args.out)
    return EXIT_OK


def cmd_bench(args: argparse.Namespace) -> int:
    df = run_bench(suite=args.suite, n=args.n, m=args.m, count=args.count, seed=args.seed,
                   epsilon=args.epsilon, omega=args.omega, timing=args.timing)
    df = transform_bench_results(df)
    if args.out:
        df.to_csv(args.out, index=False)
    else:
        df.to_csv(sys.stdout, index=False)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ica", description="Concave-additive allocation solvers")
    parser.add_argument("--log-level", default=None, help="overrides LOG_LEVEL (DEBUG, INFO, WARNING, ...)")
    sub = parser.add_subparsers(dest="command", required=True)

    solve = sub.add_parser("solve", help="run a solver on an instance file")
    solve.add_argument("--instance", required=True, help="instance JSON file")
    solve.add_argument("--mode", choices=MODES, default="mult")
    solve.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    solve.add_argument("--omega", type=float, default=DEFAULT_OMEGA, help="smoothing for --mode wbb")
    solve.add_argument("--mu", choices=("auto", "guess"), default="auto", help="curvature targets for --mode mult")
    solve.add_argument("--trace", default=None, help="write the event trace here as JSON lines")
    solve.add_argument("--out", default=None)
    solve.set_defaults(handler=cmd_solve)

    curv = sub.add_parser("curvature", help="local curvature of one valuation")
    curv.add_argument("--valuation", required=True, help="valuation descriptor JSON file")
    curv.add_argument("--width", type=float, required=True)
    curv.add_argument("--kind", choices=("mult", "add"), default="mult")
    curv.add_argument("--z-max", type=float, default=None, help="upper end of the z sweep")
    curv.add_argument("--method", choices=("auto", "numeric"), default="auto")
    curv.add_argument("--out", default=None)
    curv.set_defaults(handler=cmd_curvature)

    gap = sub.add_parser("gap-gen", help="build and verify an integrality-gap instance")
    gap.add_argument("--valuation", required=True, help="valuation descriptor JSON file")
    gap.add_argument("--width", type=float, required=True)
    gap.add_argument("--max-denominator", type=int, default=MAX_DENOMINATOR)
    gap.add_argument("--out", default=None)
    gap.set_defaults(handler=cmd_gap_gen)

    oracle = sub.add_parser("oracle", help="brute-force optimum of a small instance")
    oracle.add_argument("--instance", required=True, help="instance JSON file")
    oracle.add_argument("--objective", choices=("util", "nash"), default="util")
    oracle.add_argument("--omega", type=float, default=DEFAULT_OMEGA, help="smoothing for --objective nash")
    oracle.add_argument("--out", default=None)
    oracle.set_defaults(handler=cmd_oracle)

    bench = sub.add_parser("bench", help="solve a seeded batch and write a CSV table")
    bench.add_argument("--suite", choices=SUITES, default="random")
    bench.add_argument("--n", type=int, default=3)
    bench.add_argument("--m", type=int, default=6)
    bench.add_argument("--count", type=int, default=10)
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--epsilon", type=float, default=DEFAULT_EPSILON)
    bench.add_argument("--omega", type=float, default=DEFAULT_OMEGA)
    bench.add_argument("--timing", action="store_true", help="add a wall_time column")
    bench.add_argument("--out", default=None)
    bench.set_defaults(handler=cmd_bench)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """
    Parse arguments, run one subcommand and map failures to exit codes.

    Args:
        argv: argument list (defaults to sys.argv[1:])

    Returns:
        0 on success, 2 on invalid input, 3 on an invariant violation
    """
    parser = build_parser()
    args = parser.parse_args(argv)
    config.configure_logging(args.log_level)
    try:
        return args.handler(args)
    except InvariantViolation as e:
        logger.error(f"invariant violation: {e}")
        return EXIT_INVARIANT
    except (ValueError, FileNotFoundError) as e:
        logger.error(f"invalid input: {e}")
        return EXIT_INVALID
