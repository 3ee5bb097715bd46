"""Text formats for densities, contexts, and trace reports.

The plain density syntax round-trips exactly with the canonical form:

    expr     := term (('+' | '-') term)*
    term     := ['-'] factor ('*' factor)*
    factor   := atom ('^' posint)*
    atom     := rational | jet | func | '(' expr ')'
    jet      := name ('[' int (',' int)* ']')?
    func     := ('exp' | 'sin' | 'cos') '(' expr ')'
    rational := int ('/' posint)?

Multiplication is always written with '*'; a jet multi-index has one entry
per independent coordinate (so q[2] is the second x-derivative on a line).
Context files are line-based: one `indep` line naming the independent
coordinates, then one `field NAME even|odd antifield NAME` line per
conjugate pair; `#` starts a comment.
"""

from __future__ import annotations

import json
from fractions import Fraction
from typing import NamedTuple, Optional

from .core import (
    Expression,
    FieldContext,
    JetVar,
    RESERVED_NAMES,
    cos,
    exp,
    jet,
    sin,
)

_FUNC_BUILDERS = {"exp": exp, "sin": sin, "cos": cos}


class ParseError(ValueError):
    """A syntax or naming error, carrying the 1-based line and column."""

    def __init__(self, message: str, line: int, col: int) -> None:
        super().__init__(f"line {line}, column {col}: {message}")
        self.line = line
        self.col = col


class _Token(NamedTuple):
    kind: str  # "number" | "name" | one-char symbol | "end"
    text: str
    line: int
    col: int


_SYMBOLS = frozenset("+-*/^()[],")


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    line, col, i = 1, 1, 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
        elif ch in " \t\r":
            col += 1
            i += 1
        elif ch == "#":
            while i < n and text[i] != "\n":
                i += 1
        elif ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            tokens.append(_Token("number", text[i:j], line, col))
            col += j - i
            i = j
        elif ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            tokens.append(_Token("name", text[i:j], line, col))
            col += j - i
            i = j
        elif ch in _SYMBOLS:
            tokens.append(_Token(ch, ch, line, col))
            col += 1
            i += 1
        else:
            raise ParseError(f"unexpected character {ch!r}", line, col)
    tokens.append(_Token("end", "", line, col))
    return tokens


class _Parser:
    def __init__(self, tokens: list[_Token], ctx: FieldContext) -> None:
        self.tokens = tokens
        self.pos = 0
        self.ctx = ctx

    def peek(self) -> _Token:
        return self.tokens[self.pos]

    def advance(self) -> _Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str, what: str) -> _Token:
        tok = self.advance()
        if tok.kind != kind:
            found = repr(tok.text) if tok.text else "end of input"
            raise ParseError(f"expected {what}, found {found}", tok.line, tok.col)
        return tok

    def parse_expr(self) -> Expression:
        e = self.parse_term()
        while self.peek().kind in ("+", "-"):
            op = self.advance()
            t = self.parse_term()
            e = e + t if op.kind == "+" else e - t
        return e

    def parse_term(self) -> Expression:
        negate = self.peek().kind == "-"
        if negate:
            self.advance()
        e = self.parse_factor()
        while self.peek().kind == "*":
            self.advance()
            e = e * self.parse_factor()
        return -e if negate else e

    def parse_factor(self) -> Expression:
        e = self.parse_atom()
        while self.peek().kind == "^":
            self.advance()
            tok = self.expect("number", "a positive integer exponent")
            power = int(tok.text)
            if power < 1:
                raise ParseError("exponent must be a positive integer", tok.line, tok.col)
            e = e**power
        return e

    def parse_atom(self) -> Expression:
        tok = self.advance()
        if tok.kind == "number":
            numerator = int(tok.text)
            if self.peek().kind == "/":
                self.advance()
                den = self.expect("number", "a positive integer denominator")
                if int(den.text) == 0:
                    raise ParseError("denominator must be positive", den.line, den.col)
                return Expression.const(self.ctx, Fraction(numerator, int(den.text)))
            return Expression.const(self.ctx, numerator)
        if tok.kind == "(":
            e = self.parse_expr()
            self.expect(")", "')'")
            return e
        if tok.kind == "name":
            return self._atom_name(tok)
        found = repr(tok.text) if tok.text else "end of input"
        raise ParseError(f"expected a term, found {found}", tok.line, tok.col)

    def _atom_name(self, tok: _Token) -> Expression:
        if tok.text in RESERVED_NAMES:
            self.expect("(", f"'(' after {tok.text}")
            arg = self.parse_expr()
            self.expect(")", "')'")
            try:
                return _FUNC_BUILDERS[tok.text](arg)
            except ValueError as exc:
                raise ParseError(str(exc), tok.line, tok.col) from None
        if tok.text in self.ctx.indep:
            raise ParseError(
                f"{tok.text!r} is a base coordinate; densities may involve only "
                "fields, antifields, and their derivatives",
                tok.line,
                tok.col,
            )
        try:
            owner = self.ctx.owner(tok.text)
        except ValueError:
            raise ParseError(f"unknown symbol {tok.text!r}", tok.line, tok.col) from None
        order = self.ctx.zero_order
        if self.peek().kind == "[":
            self.advance()
            entries = [int(self.expect("number", "a jet order").text)]
            while self.peek().kind == ",":
                self.advance()
                entries.append(int(self.expect("number", "a jet order").text))
            self.expect("]", "']' or ','")
            if len(entries) != self.ctx.n_indep:
                raise ParseError(
                    f"multi-index for {tok.text!r} needs {self.ctx.n_indep} "
                    f"entr{'y' if self.ctx.n_indep == 1 else 'ies'}, got {len(entries)}",
                    tok.line,
                    tok.col,
                )
            order = tuple(entries)
        return jet(self.ctx, owner, order)


def parse_density(text: str, ctx: FieldContext) -> Expression:
    """Parse a density expression into canonical form."""
    parser = _Parser(_tokenize(text), ctx)
    e = parser.parse_expr()
    tail = parser.peek()
    if tail.kind != "end":
        raise ParseError(f"unexpected trailing input {tail.text!r}", tail.line, tail.col)
    return e


def parse_context(text: str) -> FieldContext:
    """Parse a context file: one `indep` line, then `field ... antifield ...` lines."""
    indep: Optional[list[str]] = None
    pairs: list[tuple[str, str, int]] = []
    last_line = 1
    for lineno, raw in enumerate(text.splitlines(), 1):
        last_line = lineno
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        words = line.split()
        if words[0] == "indep":
            if indep is not None:
                raise ParseError("duplicate indep line", lineno, 1)
            if len(words) < 2:
                raise ParseError("indep needs at least one coordinate name", lineno, 1)
            indep = words[1:]
        elif words[0] == "field":
            if len(words) != 5 or words[2] not in ("even", "odd") or words[3] != "antifield":
                raise ParseError(
                    "expected: field NAME even|odd antifield NAME", lineno, 1
                )
            if indep is None:
                raise ParseError("indep line must come before field lines", lineno, 1)
            pairs.append((words[1], words[4], 0 if words[2] == "even" else 1))
        else:
            raise ParseError(f"unknown directive {words[0]!r}", lineno, 1)
    try:
        return FieldContext(indep or (), pairs)
    except ValueError as exc:
        raise ParseError(str(exc), last_line, 1) from None


# ---------------------------------------------------------------------------
# formatting
# ---------------------------------------------------------------------------


def _jet_name(ctx: FieldContext, v: JetVar) -> str:
    name = ctx.names[v.owner]
    if not any(v.order):
        return name
    return f"{name}[{','.join(str(k) for k in v.order)}]"


def _plain_factors(ctx: FieldContext, key) -> list[str]:
    even, funcs, odd = key
    parts = []
    for v, power in even:
        text = _jet_name(ctx, v)
        parts.append(text if power == 1 else f"{text}^{power}")
    for kind, aid, power in funcs:
        text = f"{kind}({_plain(ctx.arg(aid))})"
        parts.append(text if power == 1 else f"{text}^{power}")
    parts.extend(_jet_name(ctx, v) for v in odd)
    return parts


def _plain(e: Expression) -> str:
    if e.is_zero():
        return "0"
    chunks = []
    for key in e.monomial_order():
        coeff = e.terms[key]
        factors = _plain_factors(e.ctx, key)
        magnitude = abs(coeff)
        if magnitude != 1 or not factors:
            factors.insert(0, str(magnitude))
        body = "*".join(factors)
        if not chunks:
            chunks.append(body if coeff > 0 else f"-{body}")
        else:
            chunks.append(f" + {body}" if coeff > 0 else f" - {body}")
    return "".join(chunks)


def _latex_jet(ctx: FieldContext, v: JetVar) -> str:
    if ctx.is_antifield(v.owner):
        base = ctx.names[ctx.antifield(v.owner)] + "^{\\dagger}"
    else:
        base = ctx.names[v.owner]
    if any(v.order):
        sub = "".join(ctx.indep[d] * k for d, k in enumerate(v.order))
        base += "_{" + sub + "}"
    return base


def _latex_power(base: str, power: int) -> str:
    if power == 1:
        return base
    if "^" in base:
        return "{" + base + "}^{" + str(power) + "}"
    return base + "^{" + str(power) + "}"


def _latex(e: Expression) -> str:
    if e.is_zero():
        return "0"
    chunks = []
    for key in e.monomial_order():
        coeff = e.terms[key]
        even, funcs, odd = key
        parts = []
        magnitude = abs(coeff)
        if magnitude != 1 or (not even and not funcs and not odd):
            if magnitude.denominator == 1:
                parts.append(str(magnitude))
            else:
                parts.append(
                    "\\frac{" + str(magnitude.numerator) + "}{" + str(magnitude.denominator) + "}"
                )
        for v, power in even:
            parts.append(_latex_power(_latex_jet(e.ctx, v), power))
        for kind, aid, power in funcs:
            arg = _latex(e.ctx.arg(aid))
            if kind == "exp":
                parts.append(_latex_power("e^{" + arg + "}", power))
            elif power == 1:
                parts.append("\\" + kind + "(" + arg + ")")
            else:
                parts.append("\\" + kind + "^{" + str(power) + "}(" + arg + ")")
        parts.extend(_latex_jet(e.ctx, v) for v in odd)
        body = " ".join(parts)
        if not chunks:
            chunks.append(body if coeff > 0 else f"-{body}")
        else:
            chunks.append(f" + {body}" if coeff > 0 else f" - {body}")
    return "".join(chunks)


def density_to_json(e: Expression) -> dict:
    """JSON-ready form of a density, with a flat table of function arguments.

    Function-argument ids are renumbered from 0 in first-use order so the
    result is independent of the context's interning history.
    """
    ctx = e.ctx
    remap: dict[int, int] = {}
    queue: list[int] = []

    def encode(x: Expression) -> dict:
        rows = []
        for key in x.monomial_order():
            even, funcs, odd = key
            func_rows = []
            for kind, aid, power in funcs:
                if aid not in remap:
                    remap[aid] = len(remap)
                    queue.append(aid)
                func_rows.append([kind, remap[aid], power])
            rows.append(
                {
                    "coeff": str(x.terms[key]),
                    "even": [[_jet_name(ctx, v), power] for v, power in even],
                    "funcs": func_rows,
                    "odd": [_jet_name(ctx, v) for v in odd],
                }
            )
        return {"monomials": rows}

    top = encode(e)
    args: dict[str, dict] = {}
    position = 0
    while position < len(queue):
        aid = queue[position]
        args[str(remap[aid])] = encode(ctx.arg(aid))
        position += 1
    top["args"] = args
    return top


def _dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def format_density(e: Expression, style: str = "plain") -> str:
    """Render a density as canonical text: "plain", "json", or "latex"."""
    if style == "plain":
        return _plain(e)
    if style == "json":
        return _dumps(density_to_json(e))
    if style == "latex":
        return _latex(e)
    raise ValueError(f"unknown format {style!r}")


# ---------------------------------------------------------------------------
# trace reports
# ---------------------------------------------------------------------------


def _term_row(t) -> dict:
    return {
        "label": t.label,
        "position": t.position,
        "group": t.group,
        "coords": list(t.coords),
        "struck": t.struck,
        "role": t.role,
        "sign": t.sign,
        "cell": [list(t.cell[0]), list(t.cell[1])],
        "blocks": {
            role: (list(block) if block is not None else None)
            for role, block in t.blocks.items()
        },
        "density": _plain(t.density),
        "status": t.status,
        "level": t.level,
        "partner": list(t.partner) if t.partner else None,
        "composite_sign": t.composite_sign,
    }


def _group_row(g) -> dict:
    return {
        "index": g.index,
        "label": g.label,
        "coords": list(g.coords),
        "struck": g.struck,
        "role": g.role,
        "sign": g.sign,
        "raw_index": g.raw_index,
        "composite_sign": g.composite_sign,
        "density": _plain(g.density),
        "pieces": [t.label for t in g.pieces],
    }


def trace_report_to_json(report) -> dict:
    sections = {}
    for name, terms, groups in (
        ("lhs", report.lhs_terms, report.lhs_groups),
        ("rhs1", report.rhs1_terms, report.rhs1_groups),
        ("rhs2", report.rhs2_terms, report.rhs2_groups),
    ):
        sections[name] = {
            "terms": [_term_row(t) for t in terms],
            "groups": [_group_row(g) for g in groups],
        }
    return {
        "labels": list(report.labels),
        "parities": dict(report.parities),
        "eq_sign": report.eq_sign,
        "verdict": report.verdict,
        "residue": _plain(report.residue),
        "ledger": {str(k): v for k, v in report.ledger.items()},
        "rhs2_relabel": {str(k): v for k, v in report.rhs2_relabel.items()},
        "matches": [list(m) for m in report.matches],
        "cancellation_pairs": [list(p) for p in report.cancellation_pairs],
        "bracket_check": dict(report.bracket_check),
        "totals": {
            "lhs": _plain(report.lhs_total),
            "rhs1": _plain(report.rhs1_total),
            "rhs2": _plain(report.rhs2_total),
        },
        "sections": sections,
    }


def format_trace_report(report, style: str = "plain") -> str:
    """Render a Jacobi trace report as readable text or as JSON."""
    if style == "json":
        return _dumps(trace_report_to_json(report))
    if style != "plain":
        raise ValueError(f"unknown format {style!r}")
    p = report.parities
    lines = [
        "shifted-graded Jacobi trace",
        f"functionals: F={report.labels[0]}  G={report.labels[1]}  H={report.labels[2]}",
        f"parities: F={p['F']} G={p['G']} H={p['H']}   eq-sign: {report.eq_sign:+d}",
        f"verdict: {report.verdict}",
        f"residue: {_plain(report.residue)}",
    ]
    for name, terms in (
        ("lhs", report.lhs_terms),
        ("rhs1", report.rhs1_terms),
        ("rhs2", report.rhs2_terms),
    ):
        n = len(terms)
        lines.append(f"{name} ({n} piece{'s' if n != 1 else ''}):")
        for t in terms:
            status = t.status
            if t.level and t.level != "canonical":
                status += f"/{t.level}"
            partner = f" -> {t.partner[0]}:{t.partner[1]}" if t.partner else ""
            lines.append(f"  <{t.label}> {status}{partner}  {_plain(t.density)}")
    lines.append(
        "reorder signs: "
        + "  ".join(f"{{{k}}}:{v:+d}" for k, v in sorted(report.ledger.items()))
    )
    if report.rhs2_relabel:
        lines.append(
            "rhs2 group relabel: "
            + "  ".join(
                f"{{{k}}}-><{v}>" for k, v in sorted(report.rhs2_relabel.items())
            )
        )
    if report.matches:
        lines.append(
            "matches: "
            + "  ".join(f"<{label}>={sec}({level})" for label, sec, level in report.matches)
        )
    if report.cancellation_pairs:
        lines.append(
            "cancellations: "
            + "  ".join(f"(<{a}>,<{b}>)" for a, b in report.cancellation_pairs)
        )
    lines.append(
        "consistency: "
        + "  ".join(f"{k}={v}" for k, v in sorted(report.bracket_check.items()))
    )
    return "\n".join(lines)
