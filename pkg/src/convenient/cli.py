"""Command line: law suites, term evaluation, polynomial derivatives, sampled curves.

Exit codes: 0 when every check passes, 1 on a law failure or a parse/type
error in a term file, 2 on bad usage or unusable input.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path

from .fd import InsufficientSamples, SampledCurve, analyze_samples
from .poly import poly_diff, poly_from_json
from .spaces import DimensionError, RealN, Vector, format_scalar, parse_space

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2
MAX_ORDER = 6


class UsageError(Exception):
    pass


def dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _space_dim(text: str) -> int:
    try:
        space = parse_space(text)
    except ValueError as exc:
        raise UsageError(f"bad space {text!r}: {exc}") from None
    if not isinstance(space, RealN):
        raise UsageError(f"laws are run on R^n, got {space}")
    if space.dim > 6:
        raise UsageError("laws are run on R^n with n <= 6")
    return space.dim


def _vector(text: str) -> Vector:
    try:
        return Vector(tuple(Fraction(c.strip()) for c in text.split(",") if c.strip()))
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"bad vector {text!r}; use comma separated rationals") from None


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


# -- subcommands -----------------------------------------------------------------------


def table(report: dict) -> str:
    rows = [("law", "suite", "cases", "failures", "max residual")]
    for law in report["laws"]:
        rows.append((law["name"], law["suite"], str(law["cases"]), str(law["failure_count"]),
                     law["max_residual"]))
    widths = [max(len(r[i]) for r in rows) for i in range(5)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip() for r in rows]
    s = report["summary"]
    lines.append(f"{s['failed']} of {s['laws']} laws failed" + (" (no cases)" if s["no_cases"] else ""))
    return "\n".join(lines) + "\n"


def cmd_axioms(args) -> int:
    from .exponential.laws import full_report

    n = _space_dim(args.space)
    if not 0 <= args.order <= MAX_ORDER:
        raise UsageError(f"--order must be between 0 and {MAX_ORDER}")
    if args.cases < 0:
        raise UsageError("--cases must be non-negative")
    report = full_report(n, args.cases, args.seed, args.order, jobs=args.jobs, tol=args.tol).to_json()
    _emit(table(report) if args.format == "table" else dump(report), args.out)
    return EXIT_OK if report["summary"]["passed"] else EXIT_FAIL


def cmd_eval(args) -> int:
    from .lang import ParseError, TypeCheckError, load_env, run_program
    from .lang.evaluate import EvalError

    text = _read(args.termfile)
    try:
        types, values = load_env(args.envfile) if args.envfile else ({}, {})
    except OSError as exc:
        raise UsageError(f"cannot read {args.envfile}: {exc.strerror}") from None
    except ValueError as exc:
        raise UsageError(f"bad environment: {exc}") from None
    try:
        results = run_program(text, types, values)
    except (ParseError, TypeCheckError) as exc:
        print(f"{args.termfile}:{exc}", file=sys.stderr)
        return EXIT_FAIL
    except (EvalError, DimensionError) as exc:
        print(f"{args.termfile}: evaluation error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    out = results[0] if len(results) == 1 else results
    _emit(dump(out), args.out)
    return EXIT_OK


def cmd_diff(args) -> int:
    try:
        p = poly_from_json(json.loads(_read(args.polyfile)))
    except ValueError as exc:
        raise UsageError(f"bad polynomial: {exc}") from None
    x, v = _vector(args.point), _vector(args.direction)
    if len(x) != p.nvars or len(v) != p.nvars:
        raise UsageError(f"point and direction must lie in R^{p.nvars}")
    _emit(dump([format_scalar(c) for c in poly_diff(p, x, v)]), args.out)
    return EXIT_OK


def cmd_curve(args) -> int:
    try:
        curve = SampledCurve.from_csv_text(_read(args.csv))
    except ValueError as exc:
        raise UsageError(f"bad samples: {exc}") from None
    try:
        result = analyze_samples(curve, args.order, center=args.center, tol=args.tol)
    except InsufficientSamples as exc:
        print(f"{args.csv}: error: {exc} for order {args.order}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    _emit(dump(result), args.out)
    return EXIT_OK


# -- parser ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="convenient", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    a = sub.add_parser("axioms", help="run the law suites on !R^n")
    a.add_argument("--space", default="R^2")
    a.add_argument("--order", type=int, default=2, help="maximum distribution order")
    a.add_argument("--cases", type=int, default=100)
    a.add_argument("--seed", type=int, default=0)
    a.add_argument("--tol", type=float, default=None, help="recorded only; every law here is exact")
    a.add_argument("--jobs", type=int, default=1)
    a.add_argument("--format", choices=("json", "table"), default="json")
    a.add_argument("--out")
    a.set_defaults(func=cmd_axioms)

    e = sub.add_parser("eval", help="check and evaluate a term file")
    e.add_argument("termfile")
    e.add_argument("envfile", nargs="?")
    e.add_argument("--out")
    e.set_defaults(func=cmd_eval)

    d = sub.add_parser("diff", help="directional derivative of a polynomial map")
    d.add_argument("polyfile")
    d.add_argument("--point", required=True)
    d.add_argument("--direction", required=True)
    d.add_argument("--out")
    d.set_defaults(func=cmd_diff)

    c = sub.add_parser("curve", help="difference quotients of a sampled curve")
    c.add_argument("csv")
    c.add_argument("--order", type=int, required=True)
    c.add_argument("--center", default=None)
    c.add_argument("--tol", type=float, default=0.05)
    c.add_argument("--out")
    c.set_defaults(func=cmd_curve)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"{ap.prog} {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
