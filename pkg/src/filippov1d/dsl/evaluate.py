"""Pointwise and interval evaluation of expression trees."""
from __future__ import annotations

import math
from functools import lru_cache
from typing import Callable

from .. import interval as ia
from ..interval import Interval, IntervalDomainError
from .ast import BinOp, Call, Const, Expr, Neg, Var


class DomainError(ArithmeticError):
    """Expression evaluated outside its domain (log 0, 1/0, sqrt(-1), ...)."""


def _finite(v: float) -> float:
    if math.isnan(v) or math.isinf(v):
        raise DomainError("non-finite value")
    return v


def _div(a, b):
    if b == 0.0:
        raise DomainError("division by zero")
    return _finite(a / b)


def _pow(a, q):
    if a == 0.0 and q < 0:
        raise DomainError("zero raised to a negative power")
    try:
        if float(q).is_integer():
            return _finite(float(a) ** q)
        return _finite(abs(a) ** q)
    except OverflowError:
        raise DomainError("overflow in power") from None


def _log(a):
    if a <= 0.0:
        raise DomainError("log of a nonpositive number")
    return math.log(a)


def _exp(a):
    try:
        return math.exp(a)
    except OverflowError:
        raise DomainError("overflow in exp") from None


def _sqrt(a):
    if a < 0.0:
        raise DomainError("sqrt of a negative number")
    return math.sqrt(a)


def _sign(a):
    return 1.0 if a > 0 else (-1.0 if a < 0 else 0.0)


_ENV = {
    "_div": _div, "_pow": _pow, "_log": _log, "_exp": _exp, "_sqrt": _sqrt,
    "_sign": _sign, "_abs": abs, "_min": min, "_max": max, "_fin": _finite,
}


def _source(e: Expr) -> str:
    if isinstance(e, Const):
        return repr(float(e.value))
    if isinstance(e, Var):
        return "x"
    if isinstance(e, Neg):
        return f"(-{_source(e.operand)})"
    if isinstance(e, BinOp):
        a, b = _source(e.left), _source(e.right)
        if e.op == "/":
            return f"_div({a}, {b})"
        if e.op == "^":
            return f"_pow({a}, {b})"
        return f"({a} {e.op} {b})"
    if isinstance(e, Call):
        return f"_{e.name}({', '.join(_source(a) for a in e.args)})"
    raise TypeError(f"not an expression: {e!r}")


@lru_cache(maxsize=4096)
def compile_expr(e: Expr) -> Callable[[float], float]:
    """Compile ``e`` into a scalar function raising DomainError on singularities."""
    code = compile(f"lambda x: _fin({_source(e)})", "<field-expr>", "eval")
    return eval(code, dict(_ENV))


def eval_expr(e: Expr, x: float) -> float:
    try:
        return compile_expr(e)(float(x))
    except (ZeroDivisionError, OverflowError, ValueError) as exc:
        raise DomainError(str(exc)) from None


def eval_interval(e: Expr, xs: Interval) -> Interval:
    """Enclosure of the values of ``e`` over ``xs``.

    Points of ``xs`` outside the domain of ``e`` are ignored; IntervalDomainError
    is raised only when no point of ``xs`` is in the domain of some node.
    """
    if isinstance(e, Const):
        return Interval(e.value, e.value)
    if isinstance(e, Var):
        return xs
    if isinstance(e, Neg):
        return -eval_interval(e.operand, xs)
    if isinstance(e, BinOp):
        a = eval_interval(e.left, xs)
        if e.op == "^" and isinstance(e.right, Const):
            return ia.ipow(a, e.right.value)
        b = eval_interval(e.right, xs)
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        if e.op == "/":
            return a / b
        if b.lo == b.hi:
            return ia.ipow(a, b.lo)
        # variable exponent: |a|^b through exp(b log|a|)
        return ia.iexp(b * ia.ilog(ia.iabs(a)))
    if isinstance(e, Call):
        args = [eval_interval(a, xs) for a in e.args]
        fn = {
            "abs": ia.iabs, "sign": ia.isign, "log": ia.ilog, "exp": ia.iexp,
            "sqrt": ia.isqrt, "min": ia.imin, "max": ia.imax,
        }[e.name]
        return fn(*args)
    raise TypeError(f"not an expression: {e!r}")


def is_continuous_on(e: Expr, xs: Interval) -> bool:
    """Sufficient test that ``e`` is defined and continuous on all of ``xs``.

    Uses interval enclosures of every argument that could cause a jump or a
    singularity; False means "not proven", not "discontinuous".
    """
    try:
        return _cont(e, xs) is not None
    except IntervalDomainError:
        return False


def _cont(e: Expr, xs: Interval) -> Interval | None:
    if isinstance(e, (Const, Var)):
        return eval_interval(e, xs)
    if isinstance(e, Neg):
        a = _cont(e.operand, xs)
        return None if a is None else -a
    if isinstance(e, BinOp):
        a = _cont(e.left, xs)
        b = _cont(e.right, xs)
        if a is None or b is None:
            return None
        if e.op == "/" and b.contains(0.0):
            return None
        if e.op == "^":
            if b.lo != b.hi:
                if a.contains(0.0):
                    return None
            elif b.lo < 0 and a.contains(0.0):
                return None
        out = eval_interval(e, xs)
        return out if out.is_finite() else None
    if isinstance(e, Call):
        args = [_cont(a, xs) for a in e.args]
        if any(a is None for a in args):
            return None
        a = args[0]
        if e.name == "sign" and a.contains(0.0):
            return None
        if e.name == "log" and a.lo <= 0.0:
            return None
        if e.name == "sqrt" and a.lo < 0.0:
            return None
        out = eval_interval(e, xs)
        return out if out.is_finite() else None
    raise TypeError(f"not an expression: {e!r}")
