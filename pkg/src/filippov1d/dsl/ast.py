"""Expression trees and field specifications."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

UNARY_FUNCS = ("abs", "sign", "log", "exp", "sqrt")
BINARY_FUNCS = ("min", "max")
BINARY_OPS = ("+", "-", "*", "/", "^")


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Var:
    pass


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple["Expr", ...]


Expr = Union[Const, Var, Neg, BinOp, Call]

X = Var()


def const(v: float) -> Const:
    return Const(float(v))


def subexpressions(e: Expr):
    """Yield every node of ``e`` (pre-order)."""
    yield e
    if isinstance(e, Neg):
        yield from subexpressions(e.operand)
    elif isinstance(e, BinOp):
        yield from subexpressions(e.left)
        yield from subexpressions(e.right)
    elif isinstance(e, Call):
        for a in e.args:
            yield from subexpressions(a)


@dataclass(frozen=True)
class Span:
    """Real interval with endpoint closedness flags; endpoints may be infinite."""

    lo: float
    hi: float
    lo_closed: bool = False
    hi_closed: bool = False

    def __post_init__(self):
        if math.isinf(self.lo) and self.lo_closed or math.isinf(self.hi) and self.hi_closed:
            raise ValueError("infinite endpoints cannot be closed")
        if self.lo > self.hi or (self.lo == self.hi and not (self.lo_closed and self.hi_closed)):
            raise ValueError(f"empty interval {self}")

    def contains(self, x: float) -> bool:
        if x < self.lo or x > self.hi:
            return False
        if x == self.lo and not self.lo_closed:
            return False
        if x == self.hi and not self.hi_closed:
            return False
        return True

    def overlaps(self, other: Span) -> bool:
        if self.hi < other.lo or other.hi < self.lo:
            return False
        if self.hi == other.lo:
            return self.hi_closed and other.lo_closed
        if other.hi == self.lo:
            return other.hi_closed and self.lo_closed
        return True

    def __str__(self):
        left = "[" if self.lo_closed else "("
        right = "]" if self.hi_closed else ")"
        return f"{left}{_fmt_bound(self.lo)},{_fmt_bound(self.hi)}{right}"


def _fmt_bound(v: float) -> str:
    if v == math.inf:
        return "inf"
    if v == -math.inf:
        return "-inf"
    return repr(float(v))


@dataclass(frozen=True)
class Piece:
    span: Span
    expr: Expr


@dataclass(frozen=True)
class Override:
    x: float
    value: float


@dataclass(frozen=True)
class DenseSegment:
    """Field equal to ``v1`` on a set ``A`` and ``v2`` off it, ``A`` dense in
    measure.  Only the measure ``|A ∩ [a, x]|`` is available, through the named
    oracle."""

    span: Span
    v1: float
    v2: float
    oracle: str = "builtin-fat-cantor"


@dataclass(frozen=True)
class FieldSpec:
    pieces: tuple[Piece, ...] = ()
    overrides: tuple[Override, ...] = ()
    dense_segments: tuple[DenseSegment, ...] = ()

    def components(self) -> list[Piece | DenseSegment]:
        """Pieces and dense segments ordered by position."""
        comps: list[Piece | DenseSegment] = [*self.pieces, *self.dense_segments]
        return sorted(comps, key=lambda c: (c.span.lo, not c.span.lo_closed))
