"""Command-line front end: ``spun verify|flat|reduce|gen-lattice|eta-inverse``."""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from .clifford import MAX_DIM, format_multivector
from .flats import (
    chart,
    dumps,
    eta_inverse_lift,
    eta_project,
    fmt_rational,
    l_ap_equations,
    l_ap_flat,
)
from .reduction import DEFAULT_BUDGET, GenericityError, PointConfig, lattice, run_reduction
from .suites import SUITES, run_suites

VERIFY_DIMS = (2, 6)
REDUCE_DIMS = (2, 4)
LATTICE_CAP = 100

EXIT_FAIL = 1
EXIT_USAGE = 2


class UsageError(Exception):
    pass


def parse_rational_list(text: str, what: str = "value") -> list[Fraction]:
    """Parse ``"1,-2/3,0"``; errors name the 1-based column of the bad entry."""
    out = []
    col = 1
    for piece in text.split(","):
        tok = piece.strip()
        where = col + (len(piece) - len(piece.lstrip()))
        if not tok:
            raise UsageError(f"{what}: empty entry at column {where}")
        try:
            if any(ch in tok for ch in ".eE_"):
                raise ValueError
            out.append(Fraction(tok))
        except (ValueError, ZeroDivisionError):
            raise UsageError(f"{what}: cannot parse {tok!r} at column {where} (expected p/q)") from None
        col += len(piece) + 1
    return out


def _check_dim(d: int, bounds: tuple[int, int], allow_large: bool, cmd: str) -> None:
    lo, hi = bounds
    if d < 2 or d > MAX_DIM:
        raise UsageError(f"{cmd}: dimension {d} is outside the supported range [2, {MAX_DIM}]")
    if not allow_large and not lo <= d <= hi:
        raise UsageError(f"{cmd}: dimension {d} is outside [{lo}, {hi}]; pass --allow-large to override")


def _emit(text: str, output: str | None) -> None:
    if output and output != "-":
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


# subcommands


def cmd_verify(args) -> int:
    _check_dim(args.dim, VERIFY_DIMS, args.allow_large, "verify")
    if args.trials < 1:
        raise UsageError("verify: --trials must be positive")
    only = tuple(args.suite) if args.suite else SUITES
    checks = run_suites(args.dim, args.trials, args.seed, only)
    ok = all(c.ok for c in checks)
    if args.format == "json":
        payload = {
            "dimension": args.dim,
            "trials": args.trials,
            "seed": args.seed,
            "ok": ok,
            "checks": [
                {"name": c.name, "total": c.total, "failed": c.failed, "notes": c.notes}
                for c in checks
            ],
        }
        sys.stdout.write(dumps(payload))
    else:
        for c in checks:
            print(c.line())
            for note in c.notes:
                print(f"    {note}")
        print(f"{'all checks passed' if ok else 'FAILURES'} (d={args.dim}, trials={args.trials}, seed={args.seed})")
    return 0 if ok else EXIT_FAIL


def cmd_flat(args) -> int:
    _check_dim(args.dim, (2, MAX_DIM), True, "flat")
    a = parse_rational_list(args.a, "--a")
    p = parse_rational_list(args.p, "--p")
    for name, v in (("--a", a), ("--p", p)):
        if len(v) != args.dim:
            raise UsageError(f"{name}: expected {args.dim} coordinates, got {len(v)}")
    system = l_ap_equations(a, p)
    flat = l_ap_flat(a, p)
    agree = system.solution_flat() == flat
    if args.format == "json":
        payload = {
            "dimension": args.dim,
            "a": [fmt_rational(c) for c in a],
            "p": [fmt_rational(c) for c in p],
            "system": system.to_json(),
            "flat": flat.to_json(),
            "cross_check": agree,
        }
        sys.stdout.write(dumps(payload))
    else:
        print(system.to_text())
        print("variables: " + ", ".join(chart(args.dim).names()))
        print("point: " + _fmt_point(flat.base))
        for v in flat.directions:
            print("direction: " + _fmt_point(v))
        print(f"cross-check: {'PASS' if agree else 'FAIL'}")
    return 0 if agree else EXIT_FAIL


def _fmt_point(v) -> str:
    return "(" + ", ".join(fmt_rational(c) for c in v) + ")"


def _load_config(path: str) -> PointConfig:
    try:
        raw = Path(path).read_text()
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e.strerror}") from None
    try:
        obj = json.loads(raw)
    except json.JSONDecodeError as e:
        raise UsageError(f"{path}: invalid JSON at line {e.lineno} column {e.colno}: {e.msg}") from None
    try:
        return PointConfig.from_json(obj)
    except ValueError as e:
        raise UsageError(f"{path}: {e}") from None


def cmd_reduce(args) -> int:
    cfg = _load_config(args.input)
    _check_dim(cfg.dimension, REDUCE_DIMS, args.allow_large, "reduce")
    try:
        report = run_reduction(cfg, seed=args.seed, budget=args.budget)
    except GenericityError as e:
        print(f"reduce: {e}", file=sys.stderr)
        return EXIT_FAIL
    text = dumps(report.to_json())
    if args.output:
        Path(args.output).write_text(text)
        print(report.summary())
    else:
        sys.stdout.write(text)
        print(report.summary(), file=sys.stderr)
    return 0 if report.ok else EXIT_FAIL


def cmd_gen_lattice(args) -> int:
    if args.side < 2:
        raise UsageError("gen-lattice: --side must be at least 2")
    _check_dim(args.dim, (2, MAX_DIM), True, "gen-lattice")
    size = args.side**args.dim
    if size > args.cap and not args.allow_large:
        raise UsageError(
            f"gen-lattice: {args.side}^{args.dim} = {size} points exceeds the cap of {args.cap}; "
            "pass --allow-large to override"
        )
    _emit(dumps(lattice(args.dim, args.side).to_json()), args.output)
    return 0


def cmd_eta_inverse(args) -> int:
    _check_dim(args.dim, (2, MAX_DIM), True, "eta-inverse")
    y = parse_rational_list(args.point, "--point")
    size = chart(args.dim).size
    if len(y) != size:
        raise UsageError(f"--point: expected {size} chart coordinates, got {len(y)}")
    g = eta_inverse_lift(args.dim, y)
    agree = list(eta_project(g.value)) == y
    if args.format == "json":
        sys.stdout.write(dumps({
            "dimension": args.dim,
            "value": format_multivector(g.value),
            "normsq": fmt_rational(g.normsq),
            "round_trip": agree,
        }))
    else:
        print(f"lift: {format_multivector(g.value)}")
        print(f"N(lift) = {fmt_rational(g.normsq)}")
        print(f"round-trip: {'PASS' if agree else 'FAIL'}")
    return 0 if agree else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="spun", description="Exact rigid-motion algebra and flat-incidence reduction.")
    sub = ap.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run the randomised exact property suites")
    v.add_argument("--dim", type=int, required=True)
    v.add_argument("--trials", type=int, default=20)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--suite", action="append", choices=SUITES, help="restrict to a suite (repeatable)")
    v.add_argument("--format", choices=("text", "json"), default="text")
    v.add_argument("--allow-large", action="store_true")
    v.set_defaults(fn=cmd_verify)

    f = sub.add_parser("flat", help="print the linear system and basis of L_ap")
    f.add_argument("--dim", type=int, required=True)
    f.add_argument("--a", required=True, help="source point, comma-separated rationals")
    f.add_argument("--p", required=True, help="target point, comma-separated rationals")
    f.add_argument("--format", choices=("text", "json"), default="text")
    f.set_defaults(fn=cmd_flat)

    r = sub.add_parser("reduce", help="run the distance-to-incidence reduction on a point file")
    r.add_argument("--input", required=True)
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--output")
    r.add_argument("--budget", type=int, default=DEFAULT_BUDGET, help="slice retry budget")
    r.add_argument("--allow-large", action="store_true")
    r.set_defaults(fn=cmd_reduce)

    g = sub.add_parser("gen-lattice", help="write the grid {0..side-1}^dim as a point file")
    g.add_argument("--dim", type=int, required=True)
    g.add_argument("--side", type=int, required=True)
    g.add_argument("--output")
    g.add_argument("--cap", type=int, default=LATTICE_CAP)
    g.add_argument("--allow-large", action="store_true")
    g.set_defaults(fn=cmd_gen_lattice)

    e = sub.add_parser("eta-inverse", help="lift a chart point to its projective group element")
    e.add_argument("--dim", type=int, required=True)
    e.add_argument("--point", required=True, help="chart coordinates, comma-separated rationals")
    e.add_argument("--format", choices=("text", "json"), default="text")
    e.set_defaults(fn=cmd_eta_inverse)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
