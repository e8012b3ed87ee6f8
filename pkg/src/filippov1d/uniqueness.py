"""Uniqueness analysis: the measure-zero discontinuity condition and the
Osgood condition at every zero of the envelope."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .dsl.asymptotics import (
    POSITIVE_LIMIT,
    POWER_LOG,
    UNKNOWN,
    ZERO_FORM,
    LocalForm,
    SeriesUnknown,
    expand,
    form_from_series,
    neg,
    numeric_local_form,
)
from .dsl.ast import Call, Const, Expr, Neg
from .dsl.evaluate import DomainError, eval_interval
from .envelope import ZERO_ATOL, EnvelopeError, envelope, zero_set
from .field import Component, Field
from .interval import Interval, IntervalDomainError
from .roots import snap

HOLDS, FAILS, INCONCLUSIVE = "Holds", "Fails", "Inconclusive"
OSGOOD, NOT_OSGOOD = "Osgood", "NotOsgood"
UNIQUE, NON_UNIQUE = "Unique", "NonUnique"

# numeric fits this close to the divergence threshold alpha = 1 are not trusted
_ALPHA_MARGIN = 0.05


class PreconditionError(ValueError):
    pass


# --- condition A ------------------------------------------------------------------

@dataclass(frozen=True)
class ConditionA:
    status: str
    region: tuple[float, float] | None = None

    def to_dict(self) -> dict:
        d: dict = {"status": self.status}
        if self.region is not None:
            d["region"] = list(self.region)
        return d


def check_condition_A(f: Field, window: tuple[float, float] | None = None) -> ConditionA:
    """Pieces are analytic, so discontinuities of b off dense segments form a
    finite set.  A dense segment is discontinuous everywhere; it breaks the
    condition exactly when its value hull excludes 0."""
    lo, hi = f.window if window is None else window
    for c in f.components:
        if not c.is_dense or c.hi <= lo or c.lo >= hi:
            continue
        if min(c.values) > 0.0 or max(c.values) < 0.0:
            return ConditionA(FAILS, (max(lo, c.lo), min(hi, c.hi)))
    return ConditionA(HOLDS)


# --- g and its local forms ----------------------------------------------------------

@dataclass(frozen=True)
class GSide:
    """g on one side of the point.

    kind: ``const`` (dense neighbour, g equals ``value``), ``expr`` (g(z) =
    max(0, sign * e(x + side*z)) for the piece expression ``expr``) or
    ``outside`` (the side leaves the analysis window).
    """

    side: int
    kind: str
    value: float = 0.0
    expr: Expr | None = None
    sign: int = 1

    @property
    def g_expr(self) -> Expr | None:
        """max(0, +-e) as an expression in the original coordinate."""
        if self.expr is None:
            return None
        inner = self.expr if self.sign > 0 else Neg(self.expr)
        return Call("max", (Const(0.0), inner))


@dataclass(frozen=True)
class GFunction:
    f: Field
    point: float
    right: GSide
    left: GSide

    def side(self, s: int) -> GSide:
        return self.right if s > 0 else self.left

    def __call__(self, z: float) -> float:
        """g(z) from the envelope at point + z (the reduced formula)."""
        if z == 0.0:
            raise ValueError("g is evaluated on a punctured neighbourhood")
        env = envelope(self.f, self.point + z)
        return max(0.0, env.M) if z > 0 else max(0.0, -env.m)


def _side(f: Field, x: float, s: int) -> GSide:
    c = f.component_at(x, s)
    if c is None:
        return GSide(s, "outside")
    if c.is_dense:
        v = max(c.values) if s > 0 else -min(c.values)
        return GSide(s, "const", value=max(0.0, v))
    return GSide(s, "expr", expr=c.expr, sign=s)


def build_g(f: Field, x: float) -> GFunction:
    """g(z) = M[(b(x+z) sign z)^+]; on the right this is max(0, M[b](x+z)),
    on the left max(0, -m[b](x+z))."""
    try:
        env = envelope(f, x)
    except EnvelopeError:
        env = None
    if env is not None and not env.contains(0.0, ZERO_ATOL):
        raise PreconditionError(f"0 is not in K[b]({x!r}) = [{env.m!r}, {env.M!r}]")
    return GFunction(f, x, _side(f, x, 1), _side(f, x, -1))


def side_local_form(g: GFunction, s: int, root_atol: float = ZERO_ATOL) -> LocalForm:
    gs = g.side(s)
    name = "right" if s > 0 else "left"
    if gs.kind == "outside":
        return LocalForm(name, UNKNOWN, note="outside the analysis window")
    if gs.kind == "const":
        if gs.value == 0.0:
            return LocalForm(name, ZERO_FORM)
        return LocalForm(name, POSITIVE_LIMIT, limit=gs.value)
    try:
        ser = expand(gs.expr, g.point, s)
        if root_atol:
            # the point is a numerically isolated root; a residual constant
            # below the tolerance is rounding, not a jump
            ser = ser.without_constant(root_atol)
        if gs.sign < 0:
            ser = neg(ser)
        if ser.is_zero or ser.sign() < 0:
            return LocalForm(name, ZERO_FORM)
        if ser.terms:
            return form_from_series(ser, s)
    except DomainError as exc:
        return LocalForm(name, UNKNOWN, note=str(exc))
    except SeriesUnknown:
        pass
    return numeric_local_form(gs.g_expr, g.point, s, z0=_reach(g.f, g.point, s))


# --- Osgood classification ----------------------------------------------------------

@dataclass(frozen=True)
class SideVerdict:
    side: str
    divergent: bool | None  # None: undecided
    form: LocalForm
    integral_bound: float | None = None
    delta: float | None = None
    note: str = ""

    def to_dict(self) -> dict:
        d = {"side": self.side, "divergent": self.divergent, "local_form": self.form.to_dict()}
        if self.integral_bound is not None:
            d["integral_bound"] = self.integral_bound
            d["delta"] = self.delta
        if self.note:
            d["note"] = self.note
        return d


@dataclass(frozen=True)
class OsgoodVerdict:
    status: str
    failing_side: str | None
    sides: tuple[SideVerdict, SideVerdict]  # (left, right)

    @property
    def integral_bound(self) -> float | None:
        for sv in self.sides:
            if sv.side == self.failing_side:
                return sv.integral_bound
        return None

    def local_forms(self) -> dict:
        return {sv.side: sv.form.to_dict() for sv in self.sides}

    def to_dict(self) -> dict:
        d: dict = {"status": self.status}
        if self.failing_side:
            d["failing_side"] = self.failing_side
            d["integral_bound"] = self.integral_bound
        d["local_form"] = self.local_forms()
        d["sides"] = [sv.to_dict() for sv in self.sides]
        return d


def _reach(f: Field, x: float, s: int) -> float:
    """Half the distance to the nearest structural point on side s, at most 1."""
    lo, hi = f.window
    cands = [hi - x] if s > 0 else [x - lo]
    for p in (*f.breakpoints, *f.critical_points):
        d = (p - x) * s
        if d > 0:
            cands.append(d)
    zs = f._cache.get(("zero_set", lo, hi, 1e-12 * (hi - lo)))
    if zs is not None:
        nxt = zs.next_in_direction(x, s)
        if nxt is not None:
            cands.append(abs(nxt - x))
    return min(1.0, 0.5 * min(cands))


def _g_lower(g: GFunction, s: int, z1: float, z2: float) -> float:
    gs = g.side(s)
    if gs.kind == "const":
        return gs.value
    a, b = g.point + s * z1, g.point + s * z2
    try:
        bound = eval_interval(gs.expr, Interval(min(a, b), max(a, b)))
    except IntervalDomainError:
        return 0.0
    low = bound.lo if gs.sign > 0 else -bound.hi
    return max(0.0, low)


def _shell_sums(g: GFunction, s: int, delta: float, shells: int = 60, sub: int = 8) -> list[float]:
    """Upper bounds of the integral of 1/g over [delta 2^-(k+1), delta 2^-k]."""
    out = []
    for k in range(shells):
        z_hi = delta * 2.0 ** -k
        z_lo = 0.5 * z_hi
        total = 0.0
        for j in range(sub):
            a = z_lo + (z_hi - z_lo) * j / sub
            b = z_lo + (z_hi - z_lo) * (j + 1) / sub
            low = _g_lower(g, s, a, b)
            if low <= 0.0:
                total = math.inf
                break
            total += (b - a) / low
        out.append(total)
    return out


def _tail_from_form(form: LocalForm, eps: float) -> float | None:
    """Asymptotic bound (with a factor-2 safety margin) of the integral of
    1 / (C z^a |log z|^b) over (0, eps) for a convergent power-log form."""
    C, a, b = form.C, form.alpha, form.beta
    L = abs(math.log(eps))
    if a < 1.0:
        return 2.0 * eps ** (1.0 - a) * L ** (-b) / (C * (1.0 - a))
    if a == 1.0 and b > 1.0:
        return 2.0 * L ** (1.0 - b) / (C * (b - 1.0))
    return None


def _finite_integral(g: GFunction, s: int, form: LocalForm) -> tuple[float | None, float, str]:
    """Certificate (bound, delta, note) that the integral of 1/g near 0 is finite."""
    delta = _reach(g.f, g.point, s)
    # shells stop while x + z is still distinguishable from x in floating point
    resolvable = int(math.log2(delta / (64 * math.ulp(g.point)))) if g.point != 0.0 else 60
    sums = _shell_sums(g, s, delta, shells=max(8, min(60, resolvable)))
    finite = [v for v in sums if math.isfinite(v)]
    if len(finite) < len(sums):
        return None, delta, "interval bound of g reaches 0 inside the shells"
    head = sum(sums)
    eps = delta * 2.0 ** -len(sums)
    if form.kind == POSITIVE_LIMIT:
        # g is bounded below near 0 by the shell minimum
        low = min(_g_lower(g, s, 0.0 if g.side(s).kind == "const" else eps * 0.5, eps), form.limit / 2)
        if low > 0:
            return head + eps / low, delta, "shell sum plus positive lower bound"
    if form.kind == POWER_LOG:
        tail = _tail_from_form(form, eps)
        if tail is not None:
            return head + tail, delta, "shell sum plus power-log tail"
    ratios = [sums[i + 1] / sums[i] for i in range(len(sums) - 9, len(sums) - 1) if sums[i] > 0]
    if ratios and max(ratios) < 0.95:
        r = max(ratios)
        return head + sums[-1] * r / (1.0 - r), delta, "shell sum with geometric tail"
    return None, delta, "partial integrals do not settle"


def _side_verdict(g: GFunction, s: int) -> SideVerdict:
    name = "right" if s > 0 else "left"
    gs = g.side(s)
    if gs.kind == "outside":
        # nothing beyond the window is analysed; the side cannot fail here
        return SideVerdict(name, True, LocalForm(name, UNKNOWN, note="outside the analysis window"),
                           note="side leaves the analysis window")
    form = side_local_form(g, s)
    if form.kind == ZERO_FORM:
        return SideVerdict(name, True, form)
    if form.kind == POWER_LOG:
        a, b = form.alpha, form.beta
        if form.method != "symbolic" and abs(a - 1.0) < _ALPHA_MARGIN:
            form_for_tail = LocalForm(name, UNKNOWN, method=form.method, note="fit too close to alpha = 1")
            bound, delta, note = _finite_integral(g, s, form_for_tail)
            if bound is None:
                return SideVerdict(name, None, form, note=note)
            return SideVerdict(name, False, form, bound, delta, note)
        if a > 1.0 or (a == 1.0 and b <= 1.0):
            return SideVerdict(name, True, form)
    bound, delta, note = _finite_integral(g, s, form)
    if bound is None:
        return SideVerdict(name, None, form, note=note)
    return SideVerdict(name, False, form, bound, delta, note)


def osgood_classify(g: GFunction) -> OsgoodVerdict:
    left, right = _side_verdict(g, -1), _side_verdict(g, 1)
    for sv in (right, left):
        if sv.divergent is False:
            return OsgoodVerdict(NOT_OSGOOD, sv.side, (left, right))
    if left.divergent and right.divergent:
        return OsgoodVerdict(OSGOOD, None, (left, right))
    return OsgoodVerdict(INCONCLUSIVE, None, (left, right))


# --- condition B ----------------------------------------------------------------------

@dataclass(frozen=True)
class ZeroCheck:
    point: float
    verdict: OsgoodVerdict
    kind: str = "point"  # point | interval-end | dense-interior
    region: tuple[float, float] | None = None

    def to_dict(self) -> dict:
        d = {"point": self.point, "kind": self.kind}
        if self.region is not None:
            d["region"] = list(self.region)
        d.update(self.verdict.to_dict())
        return d


def _dense_straddling(f: Field, a: float, b: float) -> Component | None:
    for c in f.components:
        if c.is_dense and c.lo <= a and b <= c.hi:
            return c
    return None


def check_condition_B(f: Field, window: tuple[float, float] | None = None) -> tuple[list[ZeroCheck], list]:
    """Osgood verdicts at every zero of K[b]; also returns undecided zero-set regions."""
    zs = zero_set(f, window)
    checks: list[ZeroCheck] = []
    lo, hi = f.window
    for p in zs.points:
        checks.append(ZeroCheck(p, osgood_classify(build_g(f, p))))
    for a, b in zs.intervals:
        if _dense_straddling(f, a, b) is not None:
            # every interior point is a zero of K with the same one-sided g
            x = snap(0.5 * (a + b), a + 0.25 * (b - a), b - 0.25 * (b - a))
            checks.append(ZeroCheck(x, osgood_classify(build_g(f, x)), "dense-interior", (a, b)))
        for p in (a, b):
            if lo < p < hi:
                checks.append(ZeroCheck(p, osgood_classify(build_g(f, p)), "interval-end", (a, b)))
    checks.sort(key=lambda c: c.point)
    return checks, list(zs.inconclusive)


# --- verdict ----------------------------------------------------------------------------

@dataclass(frozen=True)
class UniquenessVerdict:
    status: str
    cause: dict | None
    condition_A: ConditionA
    zero_points_checked: list[ZeroCheck] = field(default_factory=list)
    inconclusive_regions: list = field(default_factory=list)
    zero_set: list = field(default_factory=list)

    def failing_B(self) -> list[ZeroCheck]:
        return [z for z in self.zero_points_checked if z.verdict.status == NOT_OSGOOD]

    def to_dict(self) -> dict:
        d = {
            "verdict": self.status,
            "condition_A": self.condition_A.to_dict(),
            "condition_B": [z.to_dict() for z in self.zero_points_checked],
            "zero_set": self.zero_set,
        }
        if self.cause is not None:
            d["cause"] = self.cause
        if self.inconclusive_regions:
            d["inconclusive_regions"] = [list(r) for r in self.inconclusive_regions]
        return d


def uniqueness_verdict(f: Field, window: tuple[float, float] | None = None) -> UniquenessVerdict:
    """Unique iff condition A holds and every zero of K[b] is Osgood.

    A proven failure wins over undecided parts: it already exhibits more than
    one solution.  Otherwise any undecided part yields Inconclusive.
    """
    key = ("verdict", window)
    return f.cached(key, lambda: _verdict(f, window))


def _verdict(f: Field, window) -> UniquenessVerdict:
    cond_a = check_condition_A(f, window)
    checks, undecided = check_condition_B(f, window)
    zs = zero_set(f, window).to_json()
    if cond_a.status == FAILS:
        cause = {"condition": "A", "region": list(cond_a.region)}
        return UniquenessVerdict(NON_UNIQUE, cause, cond_a, checks, undecided, zs)
    failing = [c for c in checks if c.verdict.status == NOT_OSGOOD]
    if failing:
        c = failing[0]
        cause = {"condition": "B", "point": c.point, "failing_side": c.verdict.failing_side}
        return UniquenessVerdict(NON_UNIQUE, cause, cond_a, checks, undecided, zs)
    if undecided or any(c.verdict.status == INCONCLUSIVE for c in checks):
        return UniquenessVerdict(INCONCLUSIVE, None, cond_a, checks, undecided, zs)
    return UniquenessVerdict(UNIQUE, None, cond_a, checks, undecided, zs)
