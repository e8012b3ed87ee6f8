"""Closed real intervals with outward rounding.

Endpoints may be infinite; an infinite endpoint means the range is unbounded
on that side, never that an infinite value is attained.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

INF = math.inf


def _down(v: float) -> float:
    if math.isinf(v):
        return v
    return math.nextafter(v, -INF)


def _up(v: float) -> float:
    if math.isinf(v):
        return v
    return math.nextafter(v, INF)


def _two_sum_err(a: float, b: float, s: float) -> float:
    # exact a + b - s (Knuth TwoSum); only meaningful for finite inputs
    bb = s - a
    return (a - (s - bb)) + (b - bb)


def _add_down(a: float, b: float) -> float:
    s = a + b
    if math.isfinite(s) and _two_sum_err(a, b, s) >= 0.0:
        return s
    return _down(s)


def _add_up(a: float, b: float) -> float:
    s = a + b
    if math.isfinite(s) and _two_sum_err(a, b, s) <= 0.0:
        return s
    return _up(s)


def _prod(a: float, b: float) -> float:
    # 0 * inf is 0 here: endpoints at infinity are never attained
    if a == 0.0 or b == 0.0:
        return 0.0
    return a * b


def _exact_prod(a: float, b: float) -> bool:
    # products with 0 or +-1 need no rounding
    return a == 0.0 or b == 0.0 or abs(a) == 1.0 or abs(b) == 1.0


def _make(lo: float, hi: float) -> "Interval":
    # inf - inf style indeterminacy widens to the whole line
    if math.isnan(lo):
        lo = -INF
    if math.isnan(hi):
        hi = INF
    return Interval(lo, hi)


class IntervalDomainError(ValueError):
    """The whole argument interval lies outside the function's domain."""


@dataclass(frozen=True)
class Interval:
    lo: float
    hi: float

    def __post_init__(self):
        if math.isnan(self.lo) or math.isnan(self.hi) or self.lo > self.hi:
            raise ValueError(f"invalid interval [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, v: float) -> Interval:
        return cls(v, v)

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def mid(self) -> float:
        if math.isinf(self.lo) or math.isinf(self.hi):
            if math.isinf(self.lo) and math.isinf(self.hi):
                return 0.0
            return self.hi if math.isinf(self.lo) else self.lo
        return 0.5 * (self.lo + self.hi)

    def is_finite(self) -> bool:
        return not (math.isinf(self.lo) or math.isinf(self.hi))

    def contains(self, v: float) -> bool:
        return self.lo <= v <= self.hi

    def hull(self, other: Interval) -> Interval:
        return Interval(min(self.lo, other.lo), max(self.hi, other.hi))

    def split(self) -> tuple[Interval, Interval]:
        m = self.mid
        return Interval(self.lo, m), Interval(m, self.hi)

    def __repr__(self):
        return f"[{self.lo!r}, {self.hi!r}]"

    def __add__(self, other: Interval) -> Interval:
        return _make(_add_down(self.lo, other.lo), _add_up(self.hi, other.hi))

    def __sub__(self, other: Interval) -> Interval:
        return _make(_add_down(self.lo, -other.hi), _add_up(self.hi, -other.lo))

    def __neg__(self) -> Interval:
        return Interval(-self.hi, -self.lo)

    def __mul__(self, other: Interval) -> Interval:
        p = [(_prod(a, b), _exact_prod(a, b)) for a in (self.lo, self.hi) for b in (other.lo, other.hi)]
        lo, lo_exact = min(p)
        hi, hi_exact = max(p)
        return Interval(lo if lo_exact else _down(lo), hi if hi_exact else _up(hi))

    def __truediv__(self, other: Interval) -> Interval:
        return self * other.reciprocal()

    def reciprocal(self) -> Interval:
        lo, hi = self.lo, self.hi
        if lo == 0.0 and hi == 0.0:
            raise IntervalDomainError("division by the zero interval")
        if lo > 0.0 or hi < 0.0:
            return Interval(_down(1.0 / hi), _up(1.0 / lo))
        if lo == 0.0:
            return Interval(_down(1.0 / hi), INF)
        if hi == 0.0:
            return Interval(-INF, _up(1.0 / lo))
        return Interval(-INF, INF)


def iabs(x: Interval) -> Interval:
    if x.lo >= 0.0:
        return x
    if x.hi <= 0.0:
        return -x
    return Interval(0.0, max(-x.lo, x.hi))


def isign(x: Interval) -> Interval:
    lo = -1.0 if x.lo < 0.0 else (0.0 if x.lo == 0.0 else 1.0)
    hi = 1.0 if x.hi > 0.0 else (0.0 if x.hi == 0.0 else -1.0)
    return Interval(lo, hi)


def ilog(x: Interval) -> Interval:
    if x.hi <= 0.0:
        raise IntervalDomainError("log of a nonpositive interval")
    lo = -INF if x.lo <= 0.0 else _down(math.log(x.lo))
    return Interval(lo, _up(math.log(x.hi)) if not math.isinf(x.hi) else INF)


def _safe_exp(v: float) -> float:
    try:
        return math.exp(v)
    except OverflowError:
        return INF


def iexp(x: Interval) -> Interval:
    lo = 0.0 if x.lo == -INF else max(0.0, _down(_safe_exp(x.lo)))
    return Interval(lo, _up(_safe_exp(x.hi)))


def isqrt(x: Interval) -> Interval:
    if x.hi < 0.0:
        raise IntervalDomainError("sqrt of a negative interval")
    lo = 0.0 if x.lo <= 0.0 else max(0.0, _down(math.sqrt(x.lo)))
    return Interval(lo, _up(math.sqrt(x.hi)))


def _pow_scalar(v: float, q: float) -> float:
    if v == INF:
        return INF if q > 0 else 0.0
    if v == 0.0:
        return 0.0 if q > 0 else INF
    try:
        return v ** q
    except OverflowError:
        return INF


def _pow_exact(v: float) -> bool:
    # 0^q, 1^q and inf^q are exact
    return v in (0.0, 1.0, INF)


def _pow_nonneg(x: Interval, q: float) -> Interval:
    """x >= 0 raised to a real exponent; monotone on [0, inf)."""
    a, b = _pow_scalar(x.lo, q), _pow_scalar(x.hi, q)
    (lo, xlo), (hi, xhi) = sorted([(a, x.lo), (b, x.hi)])
    return Interval(lo if _pow_exact(xlo) else max(0.0, _down(lo)), hi if _pow_exact(xhi) else _up(hi))


def ipow(x: Interval, q: float) -> Interval:
    """Power with a constant exponent.

    Integer exponents use the ordinary real power; any other exponent acts on
    |x|, matching the scalar evaluator.
    """
    if q == 0.0:
        return Interval(1.0, 1.0)
    if not float(q).is_integer():
        return _pow_nonneg(iabs(x), q)
    n = int(q)
    if n > 0:
        if n % 2 == 0:
            return _pow_nonneg(iabs(x), q)
        a, b = _pow_scalar(abs(x.lo), q), _pow_scalar(abs(x.hi), q)
        lo = -a if x.lo < 0 else a
        hi = -b if x.hi < 0 else b
        return Interval(_down(lo), _up(hi))
    return ipow(x, -q).reciprocal()


def imin(a: Interval, b: Interval) -> Interval:
    return Interval(min(a.lo, b.lo), min(a.hi, b.hi))


def imax(a: Interval, b: Interval) -> Interval:
    return Interval(max(a.lo, b.lo), max(a.hi, b.hi))
