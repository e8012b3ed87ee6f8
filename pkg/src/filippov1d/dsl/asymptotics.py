"""One-sided asymptotic expansions of expressions.

Near a point ``p`` approached from one side, write ``x = p + side*s`` with
``s -> 0+`` and ``L = |log s|``.  An expansion is a finite sum of terms
``c * s**alpha * L**beta`` ordered by dominance, plus an optional remainder
order.  This is enough to read off one-sided limits, signs, and the leading
power-log behaviour that decides Osgood integrals.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .ast import BinOp, Call, Const, Expr, Neg, Var
from .evaluate import DomainError, eval_expr

MAX_TERMS = 8
_ORDER_TOL = 1e-12
_EPS = np.finfo(float).eps

Order = tuple[float, float]
Term = tuple[float, float, float]  # coefficient, alpha, beta


class SeriesUnknown(Exception):
    """The expansion could not be determined symbolically."""


def _more_dominant(o1: Order, o2: Order) -> bool:
    if abs(o1[0] - o2[0]) > _ORDER_TOL:
        return o1[0] < o2[0]
    if abs(o1[1] - o2[1]) > _ORDER_TOL:
        return o1[1] > o2[1]
    return False


def _same(o1: Order, o2: Order) -> bool:
    return abs(o1[0] - o2[0]) <= _ORDER_TOL and abs(o1[1] - o2[1]) <= _ORDER_TOL


def _dominant(o1: Order | None, o2: Order | None) -> Order | None:
    if o1 is None:
        return o2
    if o2 is None:
        return o1
    return o1 if _more_dominant(o1, o2) else o2


def is_decaying(o: Order) -> bool:
    """True if s**alpha * L**beta -> 0."""
    return _more_dominant((0.0, 0.0), o)


@dataclass(frozen=True)
class Series:
    terms: tuple[Term, ...] = ()
    rem: Order | None = None

    @property
    def is_zero(self) -> bool:
        return not self.terms and self.rem is None

    @property
    def lead(self) -> Term:
        if not self.terms:
            raise SeriesUnknown("no determinable leading term")
        return self.terms[0]

    def lead_order(self) -> Order | None:
        if self.terms:
            return self.terms[0][1:]
        return self.rem

    def limit(self) -> float:
        if self.is_zero:
            return 0.0
        if not self.terms:
            if is_decaying(self.rem):
                return 0.0
            raise SeriesUnknown("remainder does not decay")
        c, a, b = self.terms[0]
        if is_decaying((a, b)):
            return 0.0
        if _same((a, b), (0.0, 0.0)):
            return c
        return math.copysign(math.inf, c)

    def sign(self) -> int:
        """Sign of the expanded function on a punctured one-sided neighbourhood."""
        if self.is_zero:
            return 0
        return 1 if self.lead[0] > 0 else -1

    def without_constant(self, atol: float) -> Series:
        """Drop a leading constant term of size <= atol (root snapping)."""
        if self.terms and _same(self.terms[0][1:], (0.0, 0.0)) and abs(self.terms[0][0]) <= atol:
            return _normalize([(c, a, b, abs(c)) for c, a, b in self.terms[1:]], self.rem)
        return self


ZERO = Series()
ONE = Series(((1.0, 0.0, 0.0),))


def _normalize(raw: list[tuple[float, float, float, float]], rem: Order | None) -> Series:
    """raw entries are (coef, alpha, beta, magnitude-of-contributions)."""
    raw = sorted(raw, key=lambda t: (t[1], -t[2]))
    merged: list[list[float]] = []
    for c, a, b, mag in raw:
        if merged and _same((merged[-1][1], merged[-1][2]), (a, b)):
            merged[-1][0] += c
            merged[-1][3] += mag
        else:
            merged.append([c, a, b, mag])
    terms: list[Term] = []
    for c, a, b, mag in merged:
        if not math.isfinite(c):
            raise DomainError("non-finite coefficient")
        if c == 0.0 or abs(c) <= 64 * _EPS * mag:
            continue
        if rem is not None and not _more_dominant((a, b), rem):
            continue
        terms.append((c, a, b))
    terms.sort(key=lambda t: (t[1], -t[2]))
    if len(terms) > MAX_TERMS:
        rem = _dominant(rem, terms[MAX_TERMS][1:])
        terms = terms[:MAX_TERMS]
    return Series(tuple(terms), rem)


def _lift(s: Series) -> list[tuple[float, float, float, float]]:
    return [(c, a, b, abs(c)) for c, a, b in s.terms]


def add(x: Series, y: Series) -> Series:
    return _normalize(_lift(x) + _lift(y), _dominant(x.rem, y.rem))


def neg(x: Series) -> Series:
    return Series(tuple((-c, a, b) for c, a, b in x.terms), x.rem)


def mul(x: Series, y: Series) -> Series:
    if x.is_zero or y.is_zero:
        return ZERO
    raw = [
        (cx * cy, ax + ay, bx + by, abs(cx * cy))
        for cx, ax, bx in x.terms
        for cy, ay, by in y.terms
    ]
    rem = None
    lx, ly = x.lead_order(), y.lead_order()
    if x.rem is not None:
        rem = _dominant(rem, (x.rem[0] + ly[0], x.rem[1] + ly[1]))
    if y.rem is not None:
        rem = _dominant(rem, (y.rem[0] + lx[0], y.rem[1] + lx[1]))
    return _normalize(raw, rem)


def _monomial(c: float, a: float, b: float) -> Series:
    return Series(((c, a, b),))


def _compose(coeffs: list[float], u: Series) -> Series:
    """sum_k coeffs[k] * u**k for u of decaying order."""
    if u.is_zero:
        return _monomial(coeffs[0], 0.0, 0.0) if coeffs[0] else ZERO
    ou = u.lead_order()
    if not is_decaying(ou):
        raise SeriesUnknown("composition argument does not decay")
    total = ZERO
    power = ONE
    for k, ck in enumerate(coeffs):
        if k:
            power = mul(power, u)
        if ck:
            total = add(total, mul(_monomial(ck, 0.0, 0.0), power))
    k1 = len(coeffs)
    return _normalize(_lift(total), _dominant(total.rem, (ou[0] * k1, ou[1] * k1)))


def _factor(x: Series) -> tuple[Term, Series]:
    """x = lead * (1 + u) with u decaying."""
    c0, a0, b0 = x.lead
    u_raw = [(c / c0, a - a0, b - b0, abs(c / c0)) for c, a, b in x.terms[1:]]
    u_rem = None if x.rem is None else (x.rem[0] - a0, x.rem[1] - b0)
    return (c0, a0, b0), _normalize(u_raw, u_rem)


_K = MAX_TERMS


def reciprocal(x: Series) -> Series:
    if x.is_zero:
        raise DomainError("division by an identically zero expression")
    (c0, a0, b0), u = _factor(x)
    return mul(_monomial(1.0 / c0, -a0, -b0), _compose([(-1.0) ** k for k in range(_K)], u))


def power(x: Series, q: float) -> Series:
    if q == 0.0:
        return ONE
    if x.is_zero:
        if q > 0:
            return ZERO
        raise DomainError("zero raised to a negative power")
    (c0, a0, b0), u = _factor(x)
    if float(q).is_integer():
        coef = c0 ** q
    else:
        coef = abs(c0) ** q
    coeffs = [1.0]
    for k in range(1, _K):
        coeffs.append(coeffs[-1] * (q - (k - 1)) / k)
    return mul(_monomial(coef, a0 * q, b0 * q), _compose(coeffs, u))


def log(x: Series) -> Series:
    if x.is_zero:
        raise DomainError("log of zero")
    (c0, a0, b0), u = _factor(x)
    if c0 < 0:
        raise DomainError("log of a negative quantity")
    if abs(b0) > _ORDER_TOL:
        raise SeriesUnknown("log of a power-log term produces log log")
    head = _normalize([(math.log(c0), 0.0, 0.0, abs(math.log(c0))), (-a0, 0.0, 1.0, abs(a0))], None)
    coeffs = [0.0] + [(-1.0) ** (k + 1) / k for k in range(1, _K)]
    return add(head, _compose(coeffs, u))


def exp(x: Series) -> Series:
    if x.is_zero:
        return ONE
    c0 = 0.0
    c_log = 0.0
    rest = []
    for c, a, b in x.terms:
        if _same((a, b), (0.0, 0.0)):
            c0 = c
        elif _same((a, b), (0.0, 1.0)):
            c_log = c
        elif is_decaying((a, b)):
            rest.append((c, a, b, abs(c)))
        else:
            raise SeriesUnknown("exp of a divergent expression")
    if x.rem is not None and not is_decaying(x.rem):
        raise SeriesUnknown("exp argument not resolved to decaying order")
    try:
        scale = math.exp(c0)
    except OverflowError:
        raise DomainError("overflow in exp") from None
    u = _normalize(rest, x.rem)
    coeffs = [1.0 / math.factorial(k) for k in range(_K)]
    # exp(c * L) = s**(-c)
    return mul(_monomial(scale, -c_log, 0.0), _compose(coeffs, u))


def _abs(x: Series) -> Series:
    return neg(x) if x.sign() < 0 else x


def _sign(x: Series) -> Series:
    sg = x.sign()
    return _monomial(float(sg), 0.0, 0.0) if sg else ZERO


def _sqrt(x: Series) -> Series:
    if x.sign() < 0:
        raise DomainError("sqrt of a negative quantity")
    return power(x, 0.5)


def _minmax(x: Series, y: Series, want_max: bool) -> Series:
    d = add(x, neg(y))
    sg = d.sign()
    if sg == 0:
        return x
    return x if (sg > 0) == want_max else y


def expand(e: Expr, point: float, side: int) -> Series:
    """Expansion of ``e`` at ``point`` approached from ``side`` (+1 right, -1 left)."""
    if side not in (1, -1):
        raise ValueError("side must be +1 or -1")
    return _expand(e, float(point), float(side))


def _expand(e: Expr, p: float, sd: float) -> Series:
    if isinstance(e, Const):
        return _monomial(e.value, 0.0, 0.0) if e.value else ZERO
    if isinstance(e, Var):
        return _normalize([(p, 0.0, 0.0, abs(p)), (sd, 1.0, 0.0, 1.0)], None)
    if isinstance(e, Neg):
        return neg(_expand(e.operand, p, sd))
    if isinstance(e, BinOp):
        a = _expand(e.left, p, sd)
        b = _expand(e.right, p, sd)
        if e.op == "+":
            return add(a, b)
        if e.op == "-":
            return add(a, neg(b))
        if e.op == "*":
            return mul(a, b)
        if e.op == "/":
            return mul(a, reciprocal(b))
        if b.rem is None and (b.is_zero or (len(b.terms) == 1 and _same(b.terms[0][1:], (0.0, 0.0)))):
            return power(a, b.terms[0][0] if b.terms else 0.0)
        raise SeriesUnknown("non-constant exponent")
    if isinstance(e, Call):
        args = [_expand(a, p, sd) for a in e.args]
        if e.name == "abs":
            return _abs(args[0])
        if e.name == "sign":
            return _sign(args[0])
        if e.name == "log":
            return log(args[0])
        if e.name == "exp":
            return exp(args[0])
        if e.name == "sqrt":
            return _sqrt(args[0])
        if e.name == "min":
            return _minmax(args[0], args[1], want_max=False)
        if e.name == "max":
            return _minmax(args[0], args[1], want_max=True)
    raise TypeError(f"not an expression: {e!r}")


def one_sided_limit(e: Expr, point: float, side: int) -> float:
    """lim e(point + side*s) as s -> 0+; raises SeriesUnknown when undecidable."""
    return expand(e, point, side).limit()


# --- local forms -------------------------------------------------------------

ZERO_FORM = "zero"
POWER_LOG = "power-log"
POSITIVE_LIMIT = "positive-limit"
UNKNOWN = "unknown"

R2_THRESHOLD = 0.999


@dataclass(frozen=True)
class LocalForm:
    """Behaviour of a nonnegative function g(z) as z -> 0 on one side.

    kind is one of ``zero`` (g == 0 near 0), ``power-log``
    (g ~ C |z|^alpha |log|z||^beta), ``positive-limit`` (g -> limit > 0) or
    ``unknown``.
    """

    side: str
    kind: str
    C: float | None = None
    alpha: float | None = None
    beta: float | None = None
    limit: float | None = None
    method: str = "symbolic"
    note: str = field(default="", compare=False)

    def to_dict(self) -> dict:
        d = {"side": self.side, "kind": self.kind, "method": self.method}
        if self.kind == POWER_LOG:
            d.update(C=self.C, alpha=self.alpha, beta=self.beta)
        if self.kind == POSITIVE_LIMIT:
            d["limit"] = self.limit
        if self.note:
            d["note"] = self.note
        return d


def _side_name(side: int) -> str:
    return "right" if side > 0 else "left"


def _side_int(side) -> int:
    if side in ("right", 1, "+"):
        return 1
    if side in ("left", -1, "-"):
        return -1
    raise ValueError(f"bad side {side!r}")


def form_from_series(s: Series, side: int) -> LocalForm:
    name = _side_name(side)
    if s.is_zero:
        return LocalForm(name, ZERO_FORM)
    c, a, b = s.lead
    if c < 0:
        return LocalForm(name, UNKNOWN, note="function is negative near the point")
    if _same((a, b), (0.0, 0.0)):
        return LocalForm(name, POSITIVE_LIMIT, limit=c)
    return LocalForm(name, POWER_LOG, C=c, alpha=a, beta=b)


def local_form(
    e: Expr,
    point: float,
    side,
    z0: float = 1.0,
    k_min: int = 4,
    k_max: int = 40,
    root_atol: float = 0.0,
    numeric_only: bool = False,
) -> LocalForm:
    """Classify ``e(point + side*z)`` as z -> 0+.

    Symbolic expansion is tried first; when it cannot decide, the form is fitted
    by log-log regression on z_k = 2^-k z0, k = k_min..k_max, and accepted only
    if R^2 >= 0.999.  ``Zero`` is never produced by the numeric path.
    """
    sd = _side_int(side)
    if not numeric_only:
        try:
            s = expand(e, point, sd)
            if root_atol:
                s = s.without_constant(root_atol)
            if s.terms or s.is_zero:
                return form_from_series(s, sd)
        except DomainError as exc:
            return LocalForm(_side_name(sd), UNKNOWN, note=str(exc))
        except SeriesUnknown:
            pass
    return numeric_local_form(e, point, sd, z0=z0, k_min=k_min, k_max=k_max)


def numeric_local_form(e: Expr, point: float, side: int, z0: float = 1.0,
                       k_min: int = 4, k_max: int = 40) -> LocalForm:
    name = _side_name(side)
    z0 = min(float(z0), 1.0)
    zs = z0 * 2.0 ** -np.arange(k_min, k_max + 1)
    try:
        vals = np.array([eval_expr(e, point + side * z) for z in zs])
    except DomainError as exc:
        return LocalForm(name, UNKNOWN, method="numeric", note=str(exc))
    if np.any(vals <= 0):
        return LocalForm(name, UNKNOWN, method="numeric", note="nonpositive samples")
    if vals.max() - vals.min() <= 1e-12 * vals.max():
        return LocalForm(name, POSITIVE_LIMIT, limit=float(vals[-1]), method="numeric")
    logz = np.log(zs)
    design = np.column_stack([np.ones_like(zs), logz, np.log(-logz)])
    y = np.log(vals)
    coef, *_ = np.linalg.lstsq(design, y, rcond=None)
    resid = y - design @ coef
    ss_tot = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 0.0
    if r2 < R2_THRESHOLD:
        return LocalForm(name, UNKNOWN, method="numeric", note=f"regression R^2={r2:.6f}")
    C, alpha, beta = float(np.exp(coef[0])), float(coef[1]), float(coef[2])
    return LocalForm(name, POWER_LOG, C=C, alpha=alpha, beta=beta, method="numeric")
