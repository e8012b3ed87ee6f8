"""Filippov envelope K[b](x) = [m[b](x), M[b](x)] of a one-dimensional field."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .dsl.asymptotics import SeriesUnknown, expand
from .dsl.ast import Expr
from .dsl.evaluate import DomainError, eval_expr, eval_interval, is_continuous_on
from .field import Component, Field, FieldError
from .interval import Interval, IntervalDomainError
from .roots import enclose, isolate_zeros, snap

ZERO_ATOL = 1e-9


class EnvelopeError(ArithmeticError):
    """A one-sided essential limit could not be established."""


@dataclass(frozen=True)
class Envelope:
    m: float
    M: float

    def contains(self, v: float, atol: float = 0.0) -> bool:
        return self.m - atol <= v <= self.M + atol

    def excludes_zero(self) -> bool:
        return self.m > 0.0 or self.M < 0.0


def _sampled_limit(e: Expr, x: float, side: int, h: float) -> float:
    """Limit from shrinking shells [x + side*h*2^-(k+1), x + side*h*2^-k].

    Accepted once the shell enclosures shrink below a relative 1e-10 and stop
    moving; otherwise the limit is declared unknown.
    """
    prev = None
    stable = 0
    for k in range(2, 60):
        a, b = x + side * h * 2.0 ** -(k + 1), x + side * h * 2.0 ** -k
        try:
            bound = eval_interval(e, Interval(min(a, b), max(a, b)))
        except IntervalDomainError:
            raise EnvelopeError(f"expression undefined next to x={x!r}") from None
        if not bound.is_finite():
            continue
        scale = max(1.0, abs(bound.mid))
        if bound.width <= 1e-10 * scale:
            if prev is not None and abs(bound.mid - prev) <= 1e-10 * scale:
                stable += 1
                if stable >= 3:
                    return bound.mid
            else:
                stable = 0
            prev = bound.mid
    raise EnvelopeError(f"one-sided limit at x={x!r} could not be established")


def piece_limit(c: Component, x: float, side: int) -> float:
    """lim of the piece expression at x from ``side``."""
    e = c.expr
    h = 1e-9 * max(1.0, abs(x))
    a, b = (x, x + h) if side > 0 else (x - h, x)
    if is_continuous_on(e, Interval(a, b)):
        try:
            return eval_expr(e, x)
        except DomainError:
            pass
    try:
        v = expand(e, x, side).limit()
    except DomainError as exc:
        raise EnvelopeError(f"expression undefined next to x={x!r}: {exc}") from None
    except SeriesUnknown:
        span = (c.hi - x) if side > 0 else (x - c.lo)
        v = _sampled_limit(e, x, side, min(span, 1.0))
    if not math.isfinite(v):
        raise EnvelopeError(f"field is unbounded next to x={x!r}")
    return v


def side_values(f: Field, x: float, side: int) -> list[float]:
    """Candidate essential limits contributed by one side of x."""
    c = f.component_at(x, side)
    if c is None:
        return []
    if c.is_dense:
        return list(c.values)
    return [piece_limit(c, x, side)]


def envelope(f: Field, x: float) -> Envelope:
    """K[b](x) as [m, M]; overrides are invisible by construction."""
    lo, hi = f.window
    if not lo <= x <= hi:
        raise FieldError(f"x={x!r} outside the window [{lo!r}, {hi!r}]")
    c = f.component_at(x, 1)
    if c is not None and not c.is_dense and c.lo < x:
        # interior of a piece: one continuity test covers both sides
        h = 1e-9 * max(1.0, abs(x))
        if is_continuous_on(c.expr, Interval(x - h, x + h)):
            try:
                v = eval_expr(c.expr, x)
                return Envelope(v, v)
            except DomainError:
                pass
    cands = side_values(f, x, -1) + side_values(f, x, 1)
    if not cands:
        raise FieldError(f"no piece next to x={x!r}")
    return Envelope(min(cands), max(cands))


def is_continuity_point(f: Field, x: float) -> bool:
    env = envelope(f, x)
    return env.m == env.M


def envelope_hull(f: Field, a: float, b: float) -> Interval:
    """Interval containing K[b](y) for every y in [a, b] (interval arithmetic)."""
    a, b = min(a, b), max(a, b)
    if a == b:
        env = envelope(f, a)
        return Interval(env.m, env.M)
    hull = None
    for c in f.components:
        lo, hi = max(a, c.lo), min(b, c.hi)
        if lo > hi:
            continue
        if c.is_dense:
            bound = Interval(min(c.values), max(c.values))
        else:
            bound = enclose(c.expr, lo, hi)
        hull = bound if hull is None else hull.hull(bound)
    if hull is None:
        raise FieldError(f"[{a!r}, {b!r}] outside the window")
    return hull


# --- zero set -------------------------------------------------------------------

@dataclass(frozen=True)
class ZeroSet:
    """{x : m[b](x) <= 0 <= M[b](x)} on a window as points and closed intervals."""

    points: tuple[float, ...]
    intervals: tuple[tuple[float, float], ...]
    inconclusive: tuple[tuple[float, float], ...] = ()

    def items(self) -> list[float | tuple[float, float]]:
        out: list = [*self.points, *self.intervals]
        return sorted(out, key=lambda v: v if isinstance(v, float) else v[0])

    def contains(self, x: float, atol: float = 0.0) -> bool:
        if any(abs(x - p) <= atol for p in self.points):
            return True
        return any(lo - atol <= x <= hi + atol for lo, hi in self.intervals)

    def boundary_points(self) -> list[float]:
        """Points and interval endpoints, sorted."""
        pts = set(self.points)
        for lo, hi in self.intervals:
            pts.update((lo, hi))
        return sorted(pts)

    def next_in_direction(self, x: float, direction: int) -> float | None:
        """Nearest element strictly beyond x in ``direction``."""
        best = None
        for p in self.boundary_points():
            if (p - x) * direction > 0 and (best is None or abs(p - x) < abs(best - x)):
                best = p
        return best

    def to_json(self) -> list:
        out = [{"point": p} for p in self.points]
        out += [{"interval": [lo, hi]} for lo, hi in self.intervals]
        out += [{"inconclusive": [lo, hi]} for lo, hi in self.inconclusive]
        return sorted(out, key=lambda d: next(iter(d.values())) if "point" in d else next(iter(d.values()))[0])


def _contains_zero(f: Field, x: float) -> bool:
    try:
        return envelope(f, x).contains(0.0, ZERO_ATOL)
    except EnvelopeError:
        return True


def zero_set(f: Field, window: tuple[float, float] | None = None,
             resolution: float | None = None) -> ZeroSet:
    lo, hi = f.window if window is None else (max(window[0], f.window[0]), min(window[1], f.window[1]))
    if resolution is None:
        resolution = 1e-12 * (hi - lo)
    key = ("zero_set", lo, hi, resolution)
    return f.cached(key, lambda: _zero_set(f, lo, hi, resolution))


def _zero_set(f: Field, lo: float, hi: float, resolution: float) -> ZeroSet:
    points: list[float] = []
    intervals: list[tuple[float, float]] = []
    inconclusive: list[tuple[float, float]] = []

    def snap_pt(a, b):
        return snap(0.5 * (a + b), a, b)

    for c in f.components:
        c_lo, c_hi = max(lo, c.lo), min(hi, c.hi)
        if c_lo >= c_hi:
            continue
        if c.is_dense:
            if min(c.values) <= 0.0 <= max(c.values):
                intervals.append((c_lo, c_hi))
            continue
        iso = isolate_zeros(c.expr, c_lo, c_hi, resolution)
        for a, b in iso.points:
            p = snap_pt(a, b)
            if lo <= p <= hi and _contains_zero(f, p):
                points.append(p)
        for a, b in iso.intervals:
            ia = snap(a, a - 2 * resolution, a + 2 * resolution)
            ib = snap(b, b - 2 * resolution, b + 2 * resolution)
            ia, ib = max(ia, lo), min(ib, hi)
            probe = [ia + (ib - ia) * (k + 0.5) / 16 for k in range(16)]
            if all(_contains_zero(f, y) for y in probe):
                intervals.append((ia, ib))
            else:
                inconclusive.append((ia, ib))
        inconclusive += iso.inconclusive
    for p in f.breakpoints + f.critical_points + [lo, hi]:
        if lo <= p <= hi and _contains_zero(f, p):
            points.append(p)
    return _merge(points, intervals, inconclusive, resolution)


def _merge(points, intervals, inconclusive, resolution) -> ZeroSet:
    tol = 64 * resolution
    ivs = sorted(intervals)
    merged: list[list[float]] = []
    for a, b in ivs:
        if merged and a <= merged[-1][1] + tol:
            merged[-1][1] = max(merged[-1][1], b)
        else:
            merged.append([a, b])
    pts: list[float] = []
    for p in sorted(points):
        inside = False
        for iv in merged:
            if iv[0] - tol <= p <= iv[1] + tol:
                # exact breakpoints win over bisection endpoints
                if abs(p - iv[0]) <= tol:
                    iv[0] = p
                if abs(p - iv[1]) <= tol:
                    iv[1] = p
                inside = True
        if inside:
            continue
        if pts and p - pts[-1] <= tol:
            # prefer the shorter decimal among near-duplicates
            if len(repr(p)) < len(repr(pts[-1])):
                pts[-1] = p
            continue
        pts.append(p)
    return ZeroSet(tuple(pts), tuple((a, b) for a, b in merged), tuple(sorted(inconclusive)))
