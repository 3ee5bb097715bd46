"""The variational Schouten bracket and the shifted-graded Jacobi defect.

The bracket pairs right Euler derivatives of the first argument with left
Euler derivatives of the second over every field/antifield pair, with
coupling +1 on the (field, antifield) face and -1 on the (antifield, field)
face.  Its grading is shifted: |[[F,G]]| = |F| + |G| + 1 mod 2.
"""

from __future__ import annotations

from dataclasses import dataclass

from .calculus import euler
from .core import Expression
from .functional import Functional, functional_parity


def _sign(exponent: int) -> int:
    return -1 if exponent % 2 else 1


@dataclass(frozen=True, eq=False)
class BracketResult:
    """A computed bracket: the resulting functional plus its argument labels."""

    value: Functional
    provenance: tuple[str, str]

    @property
    def density(self) -> Expression:
        return self.value.density


def schouten_bracket(F: Functional, G: Functional) -> BracketResult:
    """The variational Schouten bracket [[F, G]] of homogeneous functionals."""
    if F.ctx is not G.ctx:
        raise ValueError("functionals belong to different field contexts")
    ctx = F.ctx
    provenance = (F.label or "F", G.label or "G")
    if F.density.is_zero() or G.density.is_zero():
        return BracketResult(Functional(Expression.zero(ctx)), provenance)
    functional_parity(F)
    functional_parity(G)
    density = Expression.zero(ctx)
    for field_i, anti_i in ctx.pairs:
        density = density + euler(F.density, field_i, "right") * euler(
            G.density, anti_i, "left"
        )
        density = density - euler(F.density, anti_i, "right") * euler(
            G.density, field_i, "left"
        )
    return BracketResult(Functional(density), provenance)


def eq1_sign(pF: int, pG: int) -> int:
    """The prefactor (-1)^((|F|-1)(|G|-1)) of the second right-hand bracket."""
    return _sign((pF + 1) * (pG + 1))


def jacobi_defect(F: Functional, G: Functional, H: Functional) -> Functional:
    """Left side minus right side of the shifted-graded Jacobi identity.

    Assembles [[F,[[G,H]]]] - [[[[F,G]],H]] - (-1)^((|F|-1)(|G|-1)) [[G,[[F,H]]]]
    at density level; callers test the result against zero with functional_eq.
    """
    sign = eq1_sign(functional_parity(F), functional_parity(G))
    lhs = schouten_bracket(F, schouten_bracket(G, H).value).density
    rhs1 = schouten_bracket(schouten_bracket(F, G).value, H).density
    rhs2 = schouten_bracket(G, schouten_bracket(F, H).value).density
    return Functional(lhs - rhs1 - rhs2.scale(sign))


def graded_symmetry_defect(F: Functional, G: Functional) -> Functional:
    """[[F,G]] + (-1)^((|F|-1)(|G|-1)) [[G,F]]; zero for a shifted-graded bracket.

    The assembled density is returned without any claim that it vanishes
    (for even F the (F,F) case reduces to 2[[F,F]], which need not be zero).
    """
    sign = eq1_sign(functional_parity(F), functional_parity(G))
    d = schouten_bracket(F, G).density + schouten_bracket(G, F).density.scale(sign)
    return Functional(d)


def reorder_sign_ledger(pF: int, pG: int) -> dict[int, int]:
    """Composite signs {1}..{8} for reordering the second right-hand bracket.

    Each entry is the product of the face sign, the graded transposition sign
    for moving the front factor across the struck part, and the global
    prefactor of that bracket; all exponents are reduced mod 2.
    """
    for p in (pF, pG):
        if p not in (0, 1):
            raise ValueError("parities must be 0 or 1")
    return {
        1: _sign(pF - 1),
        2: _sign(pG - 1),
        3: _sign(pF + pG),
        4: -1,
        5: _sign(pG),
        6: _sign(pG),
        7: 1,
        8: 1,
    }
