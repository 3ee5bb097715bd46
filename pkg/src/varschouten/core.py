"""Exact Z2-graded differential-polynomial algebra over jet variables.

A density is a finite sum of monomials

    coeff * (even jets with powers) * (exp/sin/cos factors) * (odd jets)

with exact rational coefficients.  Odd jet variables anticommute and square
to zero; every transposition sign is absorbed into the coefficient, so each
abstract element has a unique canonical form.  exp/sin/cos factors are kept
structurally -- no functional identities are ever applied -- and their
arguments (always parity-even) are interned per context so that equal
arguments share one id and powers of equal factors merge.
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable, NamedTuple, Sequence, Union

Order = tuple[int, ...]
Rat = Union[int, Fraction]

#: names reserved for function factors; never valid as field or coordinate names
RESERVED_NAMES = frozenset({"exp", "sin", "cos"})

_NAME_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")

#: derivative table for function factors: kind -> (kind of derivative, sign)
FUNC_DERIVATIVE = {"exp": ("exp", 1), "sin": ("cos", 1), "cos": ("sin", -1)}

#: value of each function kind at argument 0 (used by eval_zero_section)
FUNC_AT_ZERO = {"exp": Fraction(1), "sin": Fraction(0), "cos": Fraction(1)}


class JetVar(NamedTuple):
    """One jet coordinate: the `order` multi-index derivative of owner field."""

    owner: int
    order: Order


def jet_key(v: JetVar) -> tuple:
    """Canonical order of jet variables: owner, then graded-lex multi-index."""
    return (v.owner, sum(v.order), v.order)


class FieldContext:
    """Independent coordinates plus field/antifield pairs with Z2 parities.

    Owners are numbered in declaration order, each field immediately followed
    by its antifield; the antifield parity is the field parity flipped.  The
    context also owns the hash-cons table for function-factor arguments.
    """

    def __init__(
        self,
        indep: Sequence[str],
        pairs: Iterable[tuple[str, str, int]],
    ) -> None:
        self.indep = tuple(indep)
        if not self.indep:
            raise ValueError("at least one independent coordinate is required")
        self.names: list[str] = []
        self.parities: list[int] = []
        self.pairs: list[tuple[int, int]] = []
        self._antifield_of: dict[int, int] = {}
        self._field_of: dict[int, int] = {}
        self._by_name: dict[str, int] = {}
        seen = set(self.indep)
        for name in self.indep:
            _check_name(name)
        if len(seen) != len(self.indep):
            raise ValueError("independent coordinate names must be distinct")
        for fname, aname, fparity in pairs:
            for name in (fname, aname):
                _check_name(name)
                if name in seen:
                    raise ValueError(f"duplicate name {name!r} in context")
                seen.add(name)
            fi = self._add_owner(fname, fparity % 2)
            ai = self._add_owner(aname, (fparity + 1) % 2)
            self.pairs.append((fi, ai))
            self._antifield_of[fi] = ai
            self._field_of[ai] = fi
        if not self.pairs:
            raise ValueError("at least one field/antifield pair is required")
        # hash-cons storage for function-factor arguments
        self._args: list[Expression] = []
        self._arg_keys: list[tuple] = []
        self._arg_index: dict[tuple, int] = {}
        self._arg_owner_orders: dict[tuple[int, int], frozenset] = {}

    def _add_owner(self, name: str, parity: int) -> int:
        idx = len(self.names)
        self.names.append(name)
        self.parities.append(parity)
        self._by_name[name] = idx
        return idx

    # -- owners ---------------------------------------------------------

    @property
    def n_indep(self) -> int:
        return len(self.indep)

    @property
    def zero_order(self) -> Order:
        return (0,) * len(self.indep)

    def owner(self, ref: Union[int, str]) -> int:
        """Resolve a field/antifield reference (name or index) to its index."""
        if isinstance(ref, str):
            try:
                return self._by_name[ref]
            except KeyError:
                raise ValueError(f"unknown field or antifield {ref!r}") from None
        if not 0 <= ref < len(self.names):
            raise ValueError(f"owner index {ref} out of range")
        return ref

    def parity(self, ref: Union[int, str]) -> int:
        return self.parities[self.owner(ref)]

    def is_antifield(self, ref: Union[int, str]) -> bool:
        return self.owner(ref) in self._field_of

    def antifield(self, ref: Union[int, str]) -> int:
        """The antifield partner of a field (or the field of an antifield)."""
        idx = self.owner(ref)
        if idx in self._antifield_of:
            return self._antifield_of[idx]
        return self._field_of[idx]

    # -- function-argument interning -------------------------------------

    def intern_arg(self, arg: "Expression") -> int:
        key = arg.structural_key()
        idx = self._arg_index.get(key)
        if idx is None:
            idx = len(self._args)
            self._args.append(arg)
            self._arg_keys.append(key)
            self._arg_index[key] = idx
        return idx

    def arg(self, arg_id: int) -> "Expression":
        return self._args[arg_id]

    def arg_key(self, arg_id: int) -> tuple:
        return self._arg_keys[arg_id]

    def arg_owner_orders(self, arg_id: int, owner: int) -> frozenset:
        """All multi-indices with which `owner` occurs inside an interned arg."""
        cached = self._arg_owner_orders.get((arg_id, owner))
        if cached is None:
            cached = frozenset(_collect_orders(self._args[arg_id], owner))
            self._arg_owner_orders[(arg_id, owner)] = cached
        return cached


def _check_name(name: str) -> None:
    if not _NAME_RE.match(name):
        raise ValueError(f"invalid name {name!r}: expected an ASCII identifier")
    if name in RESERVED_NAMES:
        raise ValueError(f"name {name!r} is reserved for function factors")


# ---------------------------------------------------------------------------
# canonical monomial keys
#
# A term key is (even, funcs, odd) where
#   even:  tuple of (JetVar, power), sorted by jet_key, powers >= 1
#   funcs: tuple of (kind, arg_id, power), sorted by (kind, arg structural key)
#   odd:   tuple of JetVar, strictly increasing by jet_key
# ---------------------------------------------------------------------------

_EMPTY_KEY = ((), (), ())


def _merge_even(a, b):
    out = []
    i = j = 0
    while i < len(a) and j < len(b):
        ka, kb = jet_key(a[i][0]), jet_key(b[j][0])
        if ka == kb:
            out.append((a[i][0], a[i][1] + b[j][1]))
            i += 1
            j += 1
        elif ka < kb:
            out.append(a[i])
            i += 1
        else:
            out.append(b[j])
            j += 1
    out.extend(a[i:])
    out.extend(b[j:])
    return tuple(out)


def _merge_funcs(ctx, a, b):
    fkey = lambda f: (f[0], ctx.arg_key(f[1]))
    out = []
    i = j = 0
    while i < len(a) and j < len(b):
        ka, kb = fkey(a[i]), fkey(b[j])
        if ka == kb:
            out.append((a[i][0], a[i][1], a[i][2] + b[j][2]))
            i += 1
            j += 1
        elif ka < kb:
            out.append(a[i])
            i += 1
        else:
            out.append(b[j])
            j += 1
    out.extend(a[i:])
    out.extend(b[j:])
    return tuple(out)


def _merge_odd(a, b):
    """Merge two ascending odd-jet tuples; returns (tuple, sign) or None.

    The sign is (-1)^k where k counts the transpositions needed to interleave
    b into a; a repeated odd variable annihilates the monomial (None).
    """
    if not a:
        return b, 1
    if not b:
        return a, 1
    out = []
    sign = 1
    i = j = 0
    while i < len(a) and j < len(b):
        ka, kb = jet_key(a[i]), jet_key(b[j])
        if ka == kb:
            return None
        if ka < kb:
            out.append(a[i])
            i += 1
        else:
            # b[j] jumps over the remaining len(a)-i elements of a
            if (len(a) - i) % 2:
                sign = -sign
            out.append(b[j])
            j += 1
    out.extend(a[i:])
    out.extend(b[j:])
    return tuple(out), sign


def _mul_keys(ctx, k1, k2):
    """Graded product of two term keys; returns (key, sign) or None."""
    merged_odd = _merge_odd(k1[2], k2[2])
    if merged_odd is None:
        return None
    odd, sign = merged_odd
    return (_merge_even(k1[0], k2[0]), _merge_funcs(ctx, k1[1], k2[1]), odd), sign


def _sort_funcs(ctx, funcs):
    return tuple(sorted(funcs, key=lambda f: (f[0], ctx.arg_key(f[1]))))


def canonical_term(ctx, coeff, even, funcs, odd):
    """Build a canonical (key, coeff) pair from unsorted factor data.

    `even` is an iterable of (JetVar, power); `funcs` of (kind, arg_id, power);
    `odd` an iterable of JetVar in the intended product order.  Returns None
    when the coefficient vanishes or an odd variable repeats.
    """
    coeff = Fraction(coeff)
    if not coeff:
        return None
    merged: dict[JetVar, int] = {}
    for v, p in even:
        merged[v] = merged.get(v, 0) + p
    even_t = tuple(sorted(((v, p) for v, p in merged.items() if p), key=lambda it: jet_key(it[0])))
    fmerged: dict[tuple[str, int], int] = {}
    for kind, aid, p in funcs:
        fmerged[(kind, aid)] = fmerged.get((kind, aid), 0) + p
    funcs_t = _sort_funcs(ctx, ((k, a, p) for (k, a), p in fmerged.items() if p))
    odd_list = list(odd)
    # insertion sort with transposition counting keeps the graded sign exact
    sign = 1
    for i in range(1, len(odd_list)):
        j = i
        while j > 0 and jet_key(odd_list[j - 1]) > jet_key(odd_list[j]):
            odd_list[j - 1], odd_list[j] = odd_list[j], odd_list[j - 1]
            sign = -sign
            j -= 1
    for i in range(1, len(odd_list)):
        if odd_list[i - 1] == odd_list[i]:
            return None
    return (even_t, funcs_t, tuple(odd_list)), coeff * sign


class Expression:
    """A density in canonical form: dict of term keys to rational coefficients."""

    __slots__ = ("ctx", "terms")
    __hash__ = None

    def __init__(self, ctx: FieldContext, terms: dict | None = None) -> None:
        self.ctx = ctx
        self.terms = terms if terms is not None else {}

    # -- constructors -----------------------------------------------------

    @staticmethod
    def zero(ctx: FieldContext) -> "Expression":
        return Expression(ctx)

    @staticmethod
    def const(ctx: FieldContext, value: Rat) -> "Expression":
        value = Fraction(value)
        if not value:
            return Expression(ctx)
        return Expression(ctx, {_EMPTY_KEY: value})

    # -- basic queries ------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    @property
    def parity(self) -> int | None:
        """0 or 1 for homogeneous expressions, None for mixed; zero is even."""
        seen = {len(odd) % 2 for (_, _, odd) in self.terms}
        if not seen:
            return 0
        if len(seen) > 1:
            return None
        return seen.pop()

    def max_jet_order(self) -> int:
        best = 0
        for even, funcs, odd in self.terms:
            for v, _ in even:
                best = max(best, sum(v.order))
            for v in odd:
                best = max(best, sum(v.order))
            for _, aid, _ in funcs:
                best = max(best, self.ctx.arg(aid).max_jet_order())
        return best

    # -- ring operations ----------------------------------------------------

    def _require_same_ctx(self, other: "Expression") -> None:
        if self.ctx is not other.ctx:
            raise ValueError("expressions belong to different field contexts")

    def __add__(self, other: "Expression") -> "Expression":
        self._require_same_ctx(other)
        out = dict(self.terms)
        for key, c in other.terms.items():
            s = out.get(key, 0) + c
            if s:
                out[key] = s
            else:
                out.pop(key, None)
        return Expression(self.ctx, out)

    def __sub__(self, other: "Expression") -> "Expression":
        return self + (-other)

    def __neg__(self) -> "Expression":
        return Expression(self.ctx, {k: -c for k, c in self.terms.items()})

    def scale(self, factor: Rat) -> "Expression":
        factor = Fraction(factor)
        if not factor:
            return Expression(self.ctx)
        return Expression(self.ctx, {k: c * factor for k, c in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        self._require_same_ctx(other)
        out: dict = {}
        ctx = self.ctx
        for k1, c1 in self.terms.items():
            for k2, c2 in other.terms.items():
                prod = _mul_keys(ctx, k1, k2)
                if prod is None:
                    continue
                key, sign = prod
                s = out.get(key, 0) + c1 * c2 * sign
                if s:
                    out[key] = s
                else:
                    out.pop(key, None)
        return Expression(ctx, out)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    def __pow__(self, exponent: int) -> "Expression":
        if not isinstance(exponent, int) or exponent < 0:
            raise ValueError("exponent must be a nonnegative integer")
        result = Expression.const(self.ctx, 1)
        for _ in range(exponent):
            result = result * self
        return result

    def __eq__(self, other) -> bool:
        if not isinstance(other, Expression):
            return NotImplemented
        return self.ctx is other.ctx and self.terms == other.terms

    def __repr__(self) -> str:
        n = len(self.terms)
        return f"<Expression: {n} monomial{'s' if n != 1 else ''}>"

    # -- canonical identity ---------------------------------------------------

    def structural_key(self) -> tuple:
        """A history-independent identity for interning and stable ordering."""
        ctx = self.ctx
        rows = []
        for (even, funcs, odd), coeff in self.terms.items():
            rows.append(
                (
                    tuple((v.owner, v.order, p) for v, p in even),
                    tuple((kind, ctx.arg_key(aid), p) for kind, aid, p in funcs),
                    tuple((v.owner, v.order) for v in odd),
                    (coeff.numerator, coeff.denominator),
                )
            )
        return tuple(sorted(rows))

    def monomial_order(self) -> list:
        """Term keys in the canonical display order (structural, deterministic)."""
        ctx = self.ctx

        def okey(item):
            even, funcs, odd = item
            return (
                tuple((v.owner, sum(v.order), v.order, p) for v, p in even),
                tuple((kind, ctx.arg_key(aid), p) for kind, aid, p in funcs),
                tuple(jet_key(v) for v in odd),
            )

        return sorted(self.terms, key=okey)


# ---------------------------------------------------------------------------
# public builders
# ---------------------------------------------------------------------------


def normalize_order(ctx: FieldContext, order) -> Order:
    """Coerce an int (single direction or 0) or sequence to a multi-index."""
    if isinstance(order, int):
        if order < 0:
            raise ValueError("jet order must be nonnegative")
        if ctx.n_indep == 1:
            return (order,)
        if order == 0:
            return ctx.zero_order
        raise ValueError("an integer jet order needs a single independent coordinate")
    order = tuple(order)
    if len(order) != ctx.n_indep:
        raise ValueError(
            f"multi-index length {len(order)} does not match {ctx.n_indep} coordinates"
        )
    if any(k < 0 for k in order):
        raise ValueError("jet order must be nonnegative")
    return order


def jet(ctx: FieldContext, ref: Union[int, str], order=0) -> Expression:
    """The jet variable of `ref` (field/antifield name or index) at `order`."""
    owner = ctx.owner(ref)
    v = JetVar(owner, normalize_order(ctx, order))
    if ctx.parities[owner]:
        key = ((), (), (v,))
    else:
        key = (((v, 1),), (), ())
    return Expression(ctx, {key: Fraction(1)})


def _func(kind: str, arg: Expression) -> Expression:
    if arg.parity != 0:
        raise ValueError(f"{kind} argument must be parity-even")
    aid = arg.ctx.intern_arg(arg)
    return Expression(arg.ctx, {((), ((kind, aid, 1),), ()): Fraction(1)})


def exp(arg: Expression) -> Expression:
    return _func("exp", arg)


def sin(arg: Expression) -> Expression:
    return _func("sin", arg)


def cos(arg: Expression) -> Expression:
    return _func("cos", arg)


def parity_of(e: Expression) -> int | None:
    """Common Z2 parity of all monomials (zero counts as even); None if mixed."""
    return e.parity


def eval_zero_section(e: Expression) -> Fraction:
    """Value of the density with every jet variable set to zero.

    Any jet factor kills its monomial; function factors evaluate through
    their (recursively zeroed) arguments via exp(0)=1, sin(0)=0, cos(0)=1.
    A function factor surviving at a nonzero rational argument has no exact
    rational value and raises ValueError.
    """
    total = Fraction(0)
    for (even, funcs, odd), coeff in e.terms.items():
        if even or odd:
            continue
        value = coeff
        for kind, aid, power in funcs:
            at0 = eval_zero_section(e.ctx.arg(aid))
            if at0 == 0:
                fval = FUNC_AT_ZERO[kind]
            else:
                raise ValueError(
                    f"{kind}({at0}) has no exact rational value at the zero section"
                )
            value *= fval**power
            if not value:
                break
        total += value
    return total


def _collect_orders(e: Expression, owner: int) -> set:
    found = set()
    for even, funcs, odd in e.terms:
        for v, _ in even:
            if v.owner == owner:
                found.add(v.order)
        for v in odd:
            if v.owner == owner:
                found.add(v.order)
        for _, aid, _ in funcs:
            found |= e.ctx.arg_owner_orders(aid, owner)
    return found


def jet_orders(e: Expression, ref: Union[int, str]) -> set:
    """All multi-indices with which the given owner occurs in e (args included)."""
    return _collect_orders(e, e.ctx.owner(ref))
