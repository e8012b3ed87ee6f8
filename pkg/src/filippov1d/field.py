"""Materialized velocity fields."""
from __future__ import annotations

import bisect
import hashlib
import math
import threading
from dataclasses import dataclass, field

from .dsl.asymptotics import SeriesUnknown, one_sided_limit
from .dsl.ast import BinOp, Call, DenseSegment, Expr, FieldSpec, Piece, subexpressions
from .dsl.evaluate import DomainError, eval_expr
from .dsl.parser import parse_field, render
from .measure import ORACLES, MeasureOracle, MeasureOracleError, check_oracle
from .roots import enclose, isolate_zeros, snap


class FieldError(ValueError):
    """The spec cannot be materialized on the requested window."""


class _NotPointwiseDefined:
    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "NotPointwiseDefined"

    def __bool__(self):
        return False


NotPointwiseDefined = _NotPointwiseDefined()


@dataclass(frozen=True)
class Component:
    """A piece or dense segment clipped to the analysis window."""

    lo: float
    hi: float
    source: Piece | DenseSegment
    oracle: MeasureOracle | None = None

    @property
    def is_dense(self) -> bool:
        return isinstance(self.source, DenseSegment)

    @property
    def expr(self) -> Expr:
        return self.source.expr

    @property
    def values(self) -> tuple[float, float]:
        return self.source.v1, self.source.v2


@dataclass(eq=False)
class Field:
    spec: FieldSpec
    window: tuple[float, float]
    components: list[Component]
    breakpoints: list[float]
    critical_points: list[float]
    overrides: dict[float, float]
    _cache: dict = field(default_factory=dict, repr=False)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    @property
    def id(self) -> str:
        return hashlib.sha1(render(self.spec).encode()).hexdigest()[:12]

    @property
    def width(self) -> float:
        return self.window[1] - self.window[0]

    def cached(self, key, compute):
        with self._lock:
            if key in self._cache:
                return self._cache[key]
        value = compute()
        with self._lock:
            return self._cache.setdefault(key, value)

    def component_at(self, x: float, side: int) -> Component | None:
        """Component covering a one-sided punctured neighbourhood of x."""
        for c in self._candidates(x):
            if side > 0 and c.lo <= x < c.hi:
                return c
            if side < 0 and c.lo < x <= c.hi:
                return c
        return None

    def _candidates(self, x: float):
        i = bisect.bisect_right(self._starts, x)
        return self.components[max(0, i - 2): i + 1]

    def component_containing(self, x: float) -> Component | None:
        for c in self._candidates(x):
            if c.source.span.contains(x) and c.lo <= x <= c.hi:
                return c
        return None

    def __post_init__(self):
        self._starts = [c.lo for c in self.components]

    def nodes_between(self, a: float, b: float) -> list[float]:
        """Breakpoints and critical points strictly between a and b, sorted."""
        lo, hi = min(a, b), max(a, b)
        pts = sorted({p for p in (*self.breakpoints, *self.critical_points) if lo < p < hi})
        return pts

    def max_speed(self, a: float | None = None, b: float | None = None) -> float:
        """Upper bound of |b| over [a, b] (default: the window)."""
        a = self.window[0] if a is None else a
        b = self.window[1] if b is None else b
        best = 0.0
        for c in self.components:
            lo, hi = max(a, c.lo), min(b, c.hi)
            if lo > hi:
                continue
            if c.is_dense:
                best = max(best, *(abs(v) for v in c.values))
            else:
                bound = enclose(c.expr, lo, hi)
                best = max(best, abs(bound.lo), abs(bound.hi))
        return best


def _singular_args(e: Expr):
    """Subexpressions whose zeros can make e jump or blow up."""
    for node in subexpressions(e):
        if isinstance(node, Call) and node.name in ("sign", "log"):
            yield node.args[0]
        elif isinstance(node, BinOp) and node.op == "/":
            yield node.right
        elif isinstance(node, BinOp) and node.op == "^":
            q = getattr(node.right, "value", None)
            if q is None or q < 0 or not float(q).is_integer():
                yield node.left


def _critical_points(e: Expr, lo: float, hi: float, resolution: float) -> list[float]:
    pts: set[float] = set()
    for arg in _singular_args(e):
        iso = isolate_zeros(arg, lo, hi, resolution, max_cells=50_000)
        for a, b in iso.points:
            pts.add(snap(0.5 * (a + b), a, b))
        for a, b in iso.intervals:
            pts.update((snap(a, a - resolution, a + resolution), snap(b, b - resolution, b + resolution)))
    return sorted(p for p in pts if lo < p < hi)


def _check_piece(piece: Piece, lo: float, hi: float):
    e = piece.expr
    # defined except at isolated points
    n = 64
    for i in range(n + 1):
        x = lo + (hi - lo) * i / n
        if not piece.span.contains(x):
            continue
        try:
            eval_expr(e, x)
        except DomainError:
            h = 1e-7 * max(hi - lo, 1.0)
            ok = 0
            for y in (x - h, x + h):
                if lo <= y <= hi:
                    try:
                        eval_expr(e, y)
                        ok += 1
                    except DomainError:
                        pass
            if ok == 0:
                raise FieldError(f"expression of piece {piece.span} is undefined near x={x!r}") from None
    bound = enclose(e, lo, hi)
    if not bound.is_finite():
        raise FieldError(
            f"piece {piece.span} is unbounded on [{lo!r}, {hi!r}]; the field must be locally bounded"
        )


def build_field(spec: FieldSpec | str, window: tuple[float, float], oracle_tol: float = 1e-10) -> Field:
    """Materialize ``spec`` on the compact analysis window."""
    if isinstance(spec, str):
        spec = parse_field(spec)
    lo, hi = float(window[0]), float(window[1])
    if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
        raise FieldError("window must be a bounded interval with lo < hi")
    comps = [c for c in spec.components() if c.span.hi > lo and c.span.lo < hi]
    if not comps:
        raise FieldError("no piece meets the window")
    # coverage of the open window
    if comps[0].span.lo > lo:
        raise FieldError(f"coverage gap at {lo!r}..{comps[0].span.lo!r}")
    for a, b in zip(comps, comps[1:]):
        if a.span.hi < b.span.lo or (a.span.hi == b.span.lo and not (a.span.hi_closed or b.span.lo_closed)):
            raise FieldError(f"coverage gap between {a.span} and {b.span}")
    if comps[-1].span.hi < hi:
        raise FieldError(f"coverage gap at {comps[-1].span.hi!r}..{hi!r}")

    resolution = 1e-12 * (hi - lo)
    components: list[Component] = []
    critical: set[float] = set()
    for c in comps:
        c_lo, c_hi = max(lo, c.span.lo), min(hi, c.span.hi)
        if isinstance(c, DenseSegment):
            try:
                factory = ORACLES[c.oracle]
            except KeyError:
                raise FieldError(f"unknown measure oracle {c.oracle!r}") from None
            try:
                oracle = factory(c_lo, c_hi, oracle_tol)
                check_oracle(oracle, c_lo, c_hi)
            except MeasureOracleError as exc:
                raise FieldError(f"invalid measure oracle {c.oracle!r}: {exc}") from None
            components.append(Component(c_lo, c_hi, c, oracle))
        else:
            _check_piece(c, c_lo, c_hi)
            critical.update(_critical_points(c.expr, c_lo, c_hi, resolution))
            components.append(Component(c_lo, c_hi, c))
    breakpoints = {c.lo for c in components} | {c.hi for c in components}
    overrides = {o.x: o.value for o in spec.overrides if lo <= o.x <= hi}
    breakpoints |= set(overrides)
    breakpoints = sorted(p for p in breakpoints if lo < p < hi)
    critical_points = sorted(p for p in critical if p not in breakpoints)
    return Field(spec, (lo, hi), components, breakpoints, critical_points, overrides)


def value_ae(f: Field, x: float):
    """Pointwise value of the a.e. representative, honouring overrides.

    Returns ``NotPointwiseDefined`` inside dense segments.  Where the piece
    expression is singular but has a finite limit, the right limit is used.
    """
    lo, hi = f.window
    if not lo <= x <= hi:
        raise FieldError(f"x={x!r} outside the window")
    if x in f.overrides:
        return f.overrides[x]
    c = f.component_containing(x)
    if c is None:
        c = f.component_at(x, 1) or f.component_at(x, -1)
    if c.is_dense:
        return NotPointwiseDefined
    try:
        return eval_expr(c.expr, x)
    except DomainError:
        for side in (1, -1):
            try:
                v = one_sided_limit(c.expr, x, side)
            except (SeriesUnknown, DomainError):
                continue
            if math.isfinite(v):
                return v
        raise
