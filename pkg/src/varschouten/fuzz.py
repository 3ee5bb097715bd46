"""Seeded randomized stress-testing of the bracket laws.

Each trial derives its own RNG stream from the master seed, draws three
random homogeneous functionals, and checks that the Jacobi defect and the
graded-symmetry defect both integrate to zero.  Trials whose pairwise
brackets all vanish identically prove nothing and are counted separately as
degenerate (they still pass).  Reports are plain dicts whose compact JSON
dump is byte-identical across runs with the same parameters.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction

from .calculus import is_exact
from .core import Expression, FieldContext, cos, exp, jet, sin
from .functional import Functional
from .schouten import graded_symmetry_defect, jacobi_defect, schouten_bracket
from .textio import format_density

_FUNC_BUILDERS = {"exp": exp, "sin": sin, "cos": cos}
_MIX = 0x9E3779B97F4A7C15
_U64 = 0xFFFFFFFFFFFFFFFF


@dataclass(frozen=True)
class FuzzParams:
    """Knobs for the random-functional generator and the trial loop."""

    seed: int = 0
    count: int = 100
    max_jet_order: int = 2
    max_degree: int = 3
    max_monomials: int = 4
    allow_funcs: bool = True
    parity: str = "any"  # "even" | "odd" | "any"


def trial_seed(seed: int, index: int) -> int:
    """The per-trial RNG seed: decorrelated from neighbours, reproducible alone."""
    return (seed ^ (_MIX * (index + 1))) & _U64


def _random_order(ctx: FieldContext, rng: random.Random, max_total: int) -> tuple:
    order = [0] * ctx.n_indep
    for _ in range(rng.randint(0, max_total)):
        order[rng.randrange(ctx.n_indep)] += 1
    return tuple(order)


def _random_func_factor(ctx, rng, params) -> Expression:
    """One exp/sin/cos factor applied to a single even jet variable."""
    even_owners = [i for i, p in enumerate(ctx.parities) if p == 0]
    kind = rng.choice(("exp", "sin", "cos"))
    arg = jet(ctx, rng.choice(even_owners), _random_order(ctx, rng, params.max_jet_order))
    return _FUNC_BUILDERS[kind](arg)


def _random_monomial(ctx, rng, params, parity: int) -> Expression | None:
    odd_owners = [i for i, p in enumerate(ctx.parities) if p == 1]
    even_owners = [i for i, p in enumerate(ctx.parities) if p == 0]
    degree = rng.randint(max(1, parity), params.max_degree)
    for _ in range(8):
        k_odd = rng.choice(range(parity, degree + 1, 2))
        e = Expression.const(
            ctx, Fraction(rng.choice((1, -1)) * rng.randint(1, 4), rng.randint(1, 3))
        )
        for _ in range(k_odd):
            e = e * jet(ctx, rng.choice(odd_owners), _random_order(ctx, rng, params.max_jet_order))
        if e.is_zero():
            continue  # an odd jet repeated; redraw the monomial
        for _ in range(degree - k_odd):
            e = e * jet(ctx, rng.choice(even_owners), _random_order(ctx, rng, params.max_jet_order))
        if params.allow_funcs and rng.random() < 0.3:
            e = e * _random_func_factor(ctx, rng, params)
        return e
    return None


def random_expression(ctx, rng, params, parity: int) -> Expression:
    """A random density, homogeneous of the given parity (possibly zero)."""
    total = Expression.zero(ctx)
    for _ in range(rng.randint(1, params.max_monomials)):
        m = _random_monomial(ctx, rng, params, parity)
        if m is not None:
            total = total + m
    return total


def random_functional(ctx, rng, params, label: str = "") -> Functional:
    if params.parity == "even":
        parity = 0
    elif params.parity == "odd":
        parity = 1
    elif params.parity == "any":
        parity = rng.randint(0, 1)
    else:
        raise ValueError(f"unknown parity choice {params.parity!r}")
    return Functional(random_expression(ctx, rng, params, parity), label)


def run_fuzz(ctx: FieldContext, params: FuzzParams) -> dict:
    """Run the trial loop; returns the report dict (JSON-stable)."""
    verified = 0
    degenerate = 0
    failures = []
    for index in range(params.count):
        seed = trial_seed(params.seed, index)
        rng = random.Random(seed)
        F = random_functional(ctx, rng, params, "F")
        G = random_functional(ctx, rng, params, "G")
        H = random_functional(ctx, rng, params, "H")
        fg = schouten_bracket(F, G).value
        fh = schouten_bracket(F, H).value
        gh = schouten_bracket(G, H).value
        defect = jacobi_defect(F, G, H).density
        symmetry = graded_symmetry_defect(F, G).density
        jacobi_ok = is_exact(defect)
        symmetry_ok = is_exact(symmetry)
        if jacobi_ok and symmetry_ok:
            verified += 1
            if fg.is_zero() and fh.is_zero() and gh.is_zero():
                degenerate += 1
        else:
            failures.append(
                {
                    "index": index,
                    "seed": seed,
                    "densities": {
                        "F": format_density(F.density),
                        "G": format_density(G.density),
                        "H": format_density(H.density),
                    },
                    "residue": format_density(defect if not jacobi_ok else symmetry),
                }
            )
    return {
        "trials": params.count,
        "verified": verified,
        "degenerate": degenerate,
        "failures": failures,
    }
