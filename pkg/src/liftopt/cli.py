"""Command-line front end: run one problem spec, or bench a directory.

Exit codes: 0 when the solver converged (and, for bench, every row passed),
2 for iteration caps and limit cycles, 1 for any error (including a
domain_error termination).
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
import time
from pathlib import Path

import numpy as np

from .problems import oracle_minimum, parse_problem_file, solve_problem
from .types import SolveResult, Termination

__all__ = ["main", "emit_trace", "parse_trace"]


def _fmt(x: float) -> str:
    # 17 significant digits: every float64 re-parses to the identical bits
    return f"{float(x):.17g}"


def emit_trace(result: SolveResult, path) -> None:
    """Write the iteration trace as CSV: iter,set,cost,base_0..base_{N-1},height."""
    n = int(np.asarray(result.minimizer).size)
    header = "iter,set,cost," + ",".join(f"base_{i}" for i in range(n)) + ",height"
    lines = [header]
    for rec in result.trace:
        base = ",".join(_fmt(b) for b in rec.point.base)
        lines.append(f"{rec.index},{rec.which_set},{_fmt(rec.cost_value)},{base},{_fmt(rec.point.height)}")
    Path(path).write_text("\n".join(lines) + "\n")


def parse_trace(path):
    """Read a trace CSV back; numeric fields reproduce the written floats exactly."""
    text = Path(path).read_text().strip().splitlines()
    header = text[0].split(",")
    n = len(header) - 4
    rows = []
    for line in text[1:]:
        parts = line.split(",")
        rows.append({
            "iter": int(parts[0]),
            "set": parts[1],
            "cost": float(parts[2]),
            "base": np.array([float(v) for v in parts[3:3 + n]]),
            "height": float(parts[3 + n]),
        })
    return rows


def _exit_code(termination: Termination) -> int:
    if termination == Termination.CONVERGED:
        return 0
    if termination in (Termination.ITERATION_CAP, Termination.STALLED_LIMIT_CYCLE):
        return 2
    return 1  # domain_error


def _apply_overrides(spec, lambda_=None, max_iter=None):
    cfg = spec.config
    if lambda_ is not None:
        cfg = dataclasses.replace(cfg, lambda_=lambda_)
    if max_iter is not None:
        cfg = dataclasses.replace(cfg, max_iterations=max_iter)
    return dataclasses.replace(spec, config=cfg)


def _cmd_run(args) -> int:
    spec = parse_problem_file(args.spec)
    spec = _apply_overrides(spec, args.lambda_, args.max_iter)
    t0 = time.perf_counter()
    result = solve_problem(spec)
    elapsed = time.perf_counter() - t0

    print(f"problem: {spec.name}")
    print(f"solver: {spec.solver}")
    print(f"termination: {result.termination}")
    print(f"iterations: {result.iterations}")
    print("minimizer: " + " ".join(_fmt(v) for v in result.minimizer))
    print(f"min_value: {_fmt(result.min_value)}")
    if args.oracle:
        _, oracle_value = oracle_minimum(spec)
        gap = abs(result.min_value - oracle_value)
        tol = spec.oracle.tolerance
        print(f"oracle_value: {_fmt(oracle_value)}")
        print(f"oracle_gap: {_fmt(gap)}")
        print(f"oracle_pass: {'true' if gap <= tol else 'false'} (tolerance {tol:g})")
    print(f"wall_time_s: {elapsed:.3f}")

    if args.trace:
        emit_trace(result, args.trace)
    return _exit_code(result.termination)


def _cmd_bench(args) -> int:
    paths = sorted(Path(args.spec_dir).glob("*.ini"))
    if not paths:
        print(f"no .ini problem specs found in {args.spec_dir}", file=sys.stderr)
        return 1
    rows = []
    all_pass = True
    for path in paths:
        try:
            spec = parse_problem_file(path)
            spec = _apply_overrides(spec, args.lambda_, args.max_iter)
            result = solve_problem(spec)
            if spec.oracle is not None:
                _, oracle_value = oracle_minimum(spec)
                gap = abs(result.min_value - oracle_value)
                ok = gap <= spec.oracle.tolerance
                gap_text = f"{gap:.3e}"
            else:
                ok = result.termination == Termination.CONVERGED
                gap_text = "-"
            rows.append((spec.name, spec.solver, str(result.iterations), gap_text,
                         "pass" if ok else "fail"))
            all_pass &= ok
        except Exception as exc:  # a broken spec must not kill the run
            rows.append((path.stem, "-", "-", "-", f"error: {exc}"))
            all_pass = False
    widths = [max(len(r[i]) for r in rows + [("problem", "solver", "iters", "gap", "status")])
              for i in range(5)]
    header = ("problem", "solver", "iters", "gap", "status")
    print("  ".join(h.ljust(w) for h, w in zip(header, widths)))
    for r in rows:
        print("  ".join(v.ljust(w) for v, w in zip(r, widths)))
    return 0 if all_pass else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="liftopt",
        description="Minimize costs by alternating projections in a lifted space.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="solve one problem spec file")
    run.add_argument("spec", help="path to a problem .ini file")
    run.add_argument("--trace", help="write the iteration trace CSV here")
    run.add_argument("--oracle", action="store_true",
                     help="compare against the spec's declared oracle")
    run.add_argument("--lambda", dest="lambda_", type=float, default=None,
                     help="override the relaxation parameter")
    run.add_argument("--max-iter", dest="max_iter", type=int, default=None,
                     help="override max_iterations")

    bench = sub.add_parser("bench", help="run every spec in a directory, print a table")
    bench.add_argument("spec_dir", help="directory of problem .ini files")
    bench.add_argument("--lambda", dest="lambda_", type=float, default=None)
    bench.add_argument("--max-iter", dest="max_iter", type=int, default=None)

    args = parser.parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        return _cmd_bench(args)
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
