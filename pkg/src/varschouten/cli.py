"""Command-line front end.

Subcommands: euler, bracket, jacobi, trace, normalize, fuzz.  Densities are
given inline (or as @FILE to read from a file) in the plain text syntax; the
field context comes from --ctx FILE, defaulting to a single even field q with
antifield p on one independent coordinate x.  Exit status: 0 on success (and
verified identities), 1 when a checked identity fails, 2 on usage or parse
errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from .calculus import euler, is_exact
from .functional import Functional
from .fuzz import FuzzParams, run_fuzz
from .schouten import jacobi_defect, schouten_bracket
from .textio import (
    ParseError,
    density_to_json,
    format_density,
    format_trace_report,
    parse_context,
    parse_density,
)
from .trace import expand_trace

DEFAULT_CONTEXT = "indep x\nfield q even antifield p\n"


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def _read_arg(value: str) -> str:
    if value.startswith("@"):
        with open(value[1:], encoding="utf-8") as fh:
            return fh.read()
    return value


def _context(args) -> "FieldContext":
    if args.ctx:
        with open(args.ctx, encoding="utf-8") as fh:
            return parse_context(fh.read())
    return parse_context(DEFAULT_CONTEXT)


def _functionals(args, ctx, names):
    return [
        Functional(parse_density(_read_arg(getattr(args, name)), ctx), name)
        for name in names
    ]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="varschouten",
        description=(
            "Exact variational calculus on Z2-graded jet spaces: directed "
            "Euler operators, variational Schouten brackets, and term-by-term "
            "verification of the shifted-graded Jacobi identity."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, formats=("plain", "json", "latex")):
        p.add_argument(
            "--ctx",
            metavar="FILE",
            help="context file (default: 'indep x' with one even field q, antifield p)",
        )
        p.add_argument("--format", choices=formats, default="plain", help="output format")

    p_euler = sub.add_parser("euler", help="apply a directed Euler operator to a density")
    p_euler.add_argument("--density", required=True, help="density expression (or @FILE)")
    p_euler.add_argument("--wrt", required=True, metavar="NAME", help="field or antifield name")
    p_euler.add_argument("--side", choices=("left", "right"), default="left")
    add_common(p_euler)

    p_bracket = sub.add_parser("bracket", help="variational Schouten bracket of two functionals")
    p_bracket.add_argument("--F", required=True, help="first density (or @FILE)")
    p_bracket.add_argument("--G", required=True, help="second density (or @FILE)")
    add_common(p_bracket)

    p_jacobi = sub.add_parser(
        "jacobi", help="Jacobi defect of three functionals (prints ZERO or NONZERO)"
    )
    for name in ("F", "G", "H"):
        p_jacobi.add_argument(f"--{name}", required=True, help=f"density {name} (or @FILE)")
    add_common(p_jacobi)

    p_trace = sub.add_parser(
        "trace", help="labeled term-by-term expansion of the Jacobi identity"
    )
    for name in ("F", "G", "H"):
        p_trace.add_argument(f"--{name}", required=True, help=f"density {name} (or @FILE)")
    add_common(p_trace, formats=("plain", "json"))

    p_norm = sub.add_parser("normalize", help="parse a density and print its canonical form")
    p_norm.add_argument("--density", required=True, help="density expression (or @FILE)")
    add_common(p_norm)

    p_fuzz = sub.add_parser(
        "fuzz", help="randomized seeded verification of the bracket laws"
    )
    p_fuzz.add_argument("--seed", type=int, default=0, help="master seed (env VARSCHOUTEN_SEED overrides)")
    p_fuzz.add_argument("--count", type=int, default=100, help="number of trials")
    p_fuzz.add_argument("--max-jet-order", type=int, default=2)
    p_fuzz.add_argument("--max-degree", type=int, default=3)
    p_fuzz.add_argument("--max-monomials", type=int, default=4)
    p_fuzz.add_argument(
        "--allow-funcs", dest="allow_funcs", action="store_true", default=True,
        help="permit exp/sin/cos factors (default)",
    )
    p_fuzz.add_argument(
        "--no-funcs", dest="allow_funcs", action="store_false",
        help="restrict trials to differential polynomials",
    )
    p_fuzz.add_argument("--parity", choices=("even", "odd", "any"), default="any")
    add_common(p_fuzz, formats=("plain", "json"))

    return parser


def _cmd_euler(args) -> int:
    ctx = _context(args)
    e = parse_density(_read_arg(args.density), ctx)
    print(format_density(euler(e, args.wrt, args.side), args.format))
    return 0


def _cmd_bracket(args) -> int:
    ctx = _context(args)
    F, G = _functionals(args, ctx, ("F", "G"))
    print(format_density(schouten_bracket(F, G).density, args.format))
    return 0


def _cmd_jacobi(args) -> int:
    ctx = _context(args)
    F, G, H = _functionals(args, ctx, ("F", "G", "H"))
    defect = jacobi_defect(F, G, H).density
    verdict = "ZERO" if is_exact(defect) else "NONZERO"
    if args.format == "json":
        print(_dumps({"defect": density_to_json(defect), "verdict": verdict}))
    else:
        print(format_density(defect, args.format))
        print(verdict)
    return 0 if verdict == "ZERO" else 1


def _cmd_trace(args) -> int:
    ctx = _context(args)
    F, G, H = _functionals(args, ctx, ("F", "G", "H"))
    report = expand_trace(F, G, H)
    print(format_trace_report(report, args.format))
    return 0 if report.verdict == "verified" else 1


def _cmd_normalize(args) -> int:
    ctx = _context(args)
    print(format_density(parse_density(_read_arg(args.density), ctx), args.format))
    return 0


def _cmd_fuzz(args) -> int:
    ctx = _context(args)
    seed = args.seed
    env = os.environ.get("VARSCHOUTEN_SEED")
    if env is not None:
        seed = int(env, 0)
    params = FuzzParams(
        seed=seed,
        count=args.count,
        max_jet_order=args.max_jet_order,
        max_degree=args.max_degree,
        max_monomials=args.max_monomials,
        allow_funcs=args.allow_funcs,
        parity=args.parity,
    )
    report = run_fuzz(ctx, params)
    if args.format == "json":
        print(_dumps(report))
    else:
        print(
            f"{report['verified']}/{report['trials']} verified "
            f"({report['degenerate']} degenerate)"
        )
        for failure in report["failures"]:
            print(
                f"  trial {failure['index']} (seed {failure['seed']}): "
                f"residue {failure['residue']}"
            )
    return 0 if report["verified"] == report["trials"] else 1


_DISPATCH = {
    "euler": _cmd_euler,
    "bracket": _cmd_bracket,
    "jacobi": _cmd_jacobi,
    "trace": _cmd_trace,
    "normalize": _cmd_normalize,
    "fuzz": _cmd_fuzz,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _DISPATCH[args.command](args)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
