"""Recursive-descent parser and canonical printer for field files.

Grammar::

    file      := stmt (";" stmt)* [";"]
    stmt      := "on" interval ":" expr
               | "at" NUMBER ":" NUMBER
               | "dense" "on" interval ":" "{" NUMBER "," NUMBER "}"
                     "measure" ("builtin-fat-cantor" | IDENT)
    interval  := ("["|"(") bound "," bound (")"|"]")
    bound     := NUMBER | "-inf" | "inf"

Expressions use ``+ - * / ^``, unary minus, parentheses, the variable ``x``
and the functions abs, sign, log, exp, sqrt (one argument) and min, max (two
arguments).  ``#`` starts a comment running to the end of the line.
"""
from __future__ import annotations

import math
import re

from .ast import (
    BINARY_FUNCS,
    UNARY_FUNCS,
    BinOp,
    Call,
    Const,
    DenseSegment,
    Expr,
    FieldSpec,
    Neg,
    Override,
    Piece,
    Span,
    Var,
)


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None, col: int | None = None):
        self.line = line
        self.col = col
        where = f" at line {line}, column {col}" if line is not None else ""
        super().__init__(f"{message}{where}")


_NUMBER = re.compile(r"(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?")
_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_ORACLE_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_\-]*")
_PUNCT = set("+-*/^(),;:[]{}")


class _Scanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def _skip(self):
        t = self.text
        while self.pos < len(t):
            c = t[self.pos]
            if c.isspace():
                self.pos += 1
            elif c == "#":
                nl = t.find("\n", self.pos)
                self.pos = len(t) if nl < 0 else nl
            else:
                break

    def where(self, pos: int | None = None) -> tuple[int, int]:
        pos = self.pos if pos is None else pos
        line = self.text.count("\n", 0, pos) + 1
        col = pos - (self.text.rfind("\n", 0, pos) + 1) + 1
        return line, col

    def error(self, message: str, pos: int | None = None) -> ParseError:
        return ParseError(message, *self.where(pos))

    def peek(self) -> tuple[str, str]:
        """Return (kind, text) of the next token without consuming it."""
        self._skip()
        t = self.text
        if self.pos >= len(t):
            return "eof", ""
        c = t[self.pos]
        if c in _PUNCT:
            return "punct", c
        m = _NUMBER.match(t, self.pos)
        if m:
            return "number", m.group(0)
        m = _NAME.match(t, self.pos)
        if m:
            return "name", m.group(0)
        raise self.error(f"unexpected character {c!r}")

    def next(self) -> tuple[str, str, int]:
        kind, text = self.peek()
        start = self.pos
        self.pos += len(text)
        return kind, text, start

    def expect(self, text: str) -> int:
        kind, tok, start = self.next()
        if tok != text or kind == "eof":
            raise self.error(f"expected {text!r}, found {tok or 'end of input'!r}", start)
        return start

    def accept(self, text: str) -> bool:
        kind, tok = self.peek()
        if kind != "eof" and tok == text:
            self.next()
            return True
        return False

    def oracle_name(self) -> str:
        self._skip()
        m = _ORACLE_NAME.match(self.text, self.pos)
        if not m:
            raise self.error("expected a measure oracle name")
        self.pos = m.end()
        return m.group(0)


class _Parser:
    def __init__(self, text: str):
        self.s = _Scanner(text)

    # -- numbers and intervals -------------------------------------------
    def signed_number(self, allow_inf: bool = False) -> float:
        negative = self.s.accept("-")
        kind, tok, start = self.s.next()
        if kind == "number":
            v = float(tok)
        elif kind == "name" and tok == "inf" and allow_inf:
            v = math.inf
        else:
            raise self.s.error(f"expected a number, found {tok or 'end of input'!r}", start)
        return -v if negative else v

    def span(self) -> Span:
        start = self.s.pos
        kind, tok, _ = self.s.next()
        if tok not in "[(" or kind != "punct":
            raise self.s.error("expected '[' or '('", start)
        lo = self.signed_number(allow_inf=True)
        self.s.expect(",")
        hi = self.signed_number(allow_inf=True)
        kind, close, pos = self.s.next()
        if close not in ")]" or kind != "punct":
            raise self.s.error("expected ']' or ')'", pos)
        try:
            return Span(lo, hi, tok == "[", close == "]")
        except ValueError as exc:
            raise self.s.error(str(exc), start) from None

    # -- expressions -------------------------------------------------------
    def expr(self) -> Expr:
        e = self.term()
        while True:
            kind, tok = self.s.peek()
            if kind == "punct" and tok in "+-":
                self.s.next()
                e = BinOp(tok, e, self.term())
            else:
                return e

    def term(self) -> Expr:
        e = self.unary()
        while True:
            kind, tok = self.s.peek()
            if kind == "punct" and tok in "*/":
                self.s.next()
                e = BinOp(tok, e, self.unary())
            else:
                return e

    def unary(self) -> Expr:
        if self.s.accept("-"):
            operand = self.unary()
            if isinstance(operand, Const):
                return Const(-operand.value)
            return Neg(operand)
        if self.s.accept("+"):
            return self.unary()
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.s.accept("^"):
            return BinOp("^", base, self.unary())
        return base

    def atom(self) -> Expr:
        kind, tok, start = self.s.next()
        if kind == "number":
            return Const(float(tok))
        if kind == "punct" and tok == "(":
            e = self.expr()
            self.s.expect(")")
            return e
        if kind == "name":
            if tok == "x":
                return Var()
            if tok in UNARY_FUNCS or tok in BINARY_FUNCS:
                self.s.expect("(")
                args = [self.expr()]
                if tok in BINARY_FUNCS:
                    self.s.expect(",")
                    args.append(self.expr())
                self.s.expect(")")
                return Call(tok, tuple(args))
            raise self.s.error(f"unknown name {tok!r}", start)
        raise self.s.error(f"unexpected {tok or 'end of input'!r} in expression", start)

    # -- statements --------------------------------------------------------
    def file(self) -> tuple[FieldSpec, list[int]]:
        pieces, overrides, dense = [], [], []
        starts: dict[object, int] = {}
        while True:
            kind, tok = self.s.peek()
            if kind == "eof":
                break
            _, tok, start = self.s.next()
            if tok == "on":
                span = self.span()
                self.s.expect(":")
                item = Piece(span, self.expr())
                pieces.append(item)
            elif tok == "at":
                x = self.signed_number()
                self.s.expect(":")
                item = Override(x, self.signed_number())
                overrides.append(item)
            elif tok == "dense":
                self.s.expect("on")
                span = self.span()
                self.s.expect(":")
                self.s.expect("{")
                v1 = self.signed_number()
                self.s.expect(",")
                v2 = self.signed_number()
                self.s.expect("}")
                self.s.expect("measure")
                item = DenseSegment(span, v1, v2, self.s.oracle_name())
                dense.append(item)
            else:
                raise self.s.error(f"expected 'on', 'at' or 'dense', found {tok!r}", start)
            starts[id(item)] = start
            kind, tok = self.s.peek()
            if kind == "eof":
                break
            self.s.expect(";")
        spec = FieldSpec(tuple(pieces), tuple(overrides), tuple(dense))
        self._validate(spec, starts)
        return spec

    def _validate(self, spec: FieldSpec, starts: dict[object, int]):
        comps = [*spec.pieces, *spec.dense_segments]
        if not comps:
            raise ParseError("field defines no pieces")
        for i, a in enumerate(comps):
            for b in comps[i + 1:]:
                if a.span.overlaps(b.span):
                    later = max(starts[id(a)], starts[id(b)])
                    raise self.s.error(f"overlapping intervals {a.span} and {b.span}", later)
        for d in spec.dense_segments:
            if d.v1 == d.v2:
                raise self.s.error("dense segment needs two distinct values", starts[id(d)])
        for o in spec.overrides:
            if not any(c.span.contains(o.x) for c in comps):
                raise self.s.error(f"override at {o.x!r} lies outside every piece", starts[id(o)])


def parse_field(text: str) -> FieldSpec:
    """Parse and validate a field definition."""
    return _Parser(text).file()


def parse_expr(text: str) -> Expr:
    p = _Parser(text)
    e = p.expr()
    kind, tok = p.s.peek()
    if kind != "eof":
        raise p.s.error(f"unexpected {tok!r} after expression")
    return e


def render_expr(e: Expr) -> str:
    if isinstance(e, Const):
        r = repr(float(e.value))
        return f"({r})" if r.startswith("-") else r
    if isinstance(e, Var):
        return "x"
    if isinstance(e, Neg):
        return f"(-{render_expr(e.operand)})"
    if isinstance(e, BinOp):
        return f"({render_expr(e.left)} {e.op} {render_expr(e.right)})"
    if isinstance(e, Call):
        return f"{e.name}({', '.join(render_expr(a) for a in e.args)})"
    raise TypeError(f"not an expression: {e!r}")


def render(spec: FieldSpec) -> str:
    """Canonical text of ``spec``; ``parse_field(render(s)) == s``."""
    lines = [f"on {p.span}: {render_expr(p.expr)}" for p in spec.pieces]
    lines += [
        f"dense on {d.span}: {{{d.v1!r}, {d.v2!r}}} measure {d.oracle}"
        for d in spec.dense_segments
    ]
    lines += [f"at {o.x!r}: {o.value!r}" for o in spec.overrides]
    return ";\n".join(lines) + "\n"
