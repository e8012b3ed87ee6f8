"""Interval-bisection helpers: range enclosure and zero isolation."""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .dsl.asymptotics import SeriesUnknown, expand
from .dsl.ast import Expr
from .dsl.evaluate import DomainError, eval_expr, eval_interval
from .interval import Interval, IntervalDomainError


def snap(x: float, lo: float, hi: float) -> float:
    """Shortest decimal inside [lo, hi], falling back to x."""
    for digits in range(16):
        r = round(x, digits)
        if lo <= r <= hi:
            return r + 0.0
    return x


def _removable_values(e: Expr, lo: float, hi: float) -> list[float] | None:
    """Sampled values on a tiny cell when they show a removable singularity
    (finite and nearly constant), else None."""
    vals = []
    for k in range(9):
        x = lo + (hi - lo) * k / 8
        try:
            vals.append(eval_expr(e, x))
        except DomainError:
            sides = (1,) if k == 0 else (-1,) if k == 8 else (-1, 1)
            for side in sides:
                try:
                    vals.append(expand(e, x, side).limit())
                except (SeriesUnknown, DomainError):
                    return None
    if not vals or not all(math.isfinite(v) for v in vals):
        return None
    scale = max(1.0, max(abs(v) for v in vals))
    if max(vals) - min(vals) > 1e-6 * scale:
        return None
    return vals


def enclose(e: Expr, a: float, b: float, min_width: float | None = None,
            max_cells: int = 4000, use_series: bool = True) -> Interval:
    """Enclosure of e over [a, b], refining cells whose bound is infinite.

    Cells still unbounded at ``min_width`` are resolved from one-sided limits
    at their midpoint when those are finite (removable singularities such as
    x*log|x| at 0); this last step is a sampled, not a rigorous, bound.
    """
    if a > b:
        a, b = b, a
    if min_width is None:
        min_width = 1e-9 * max(b - a, 1e-300)
    hull: Interval | None = None
    stack = [(a, b)]
    cells = 0
    while stack:
        lo, hi = stack.pop()
        cells += 1
        try:
            bound = eval_interval(e, Interval(lo, hi))
        except IntervalDomainError:
            continue
        if not bound.is_finite() and hi - lo > min_width and cells < max_cells:
            mid = 0.5 * (lo + hi)
            stack += [(lo, mid), (mid, hi)]
            continue
        if not bound.is_finite() and use_series:
            vals = _removable_values(e, lo, hi)
            if vals:
                spread = max(vals) - min(vals)
                bound = Interval(min(vals) - spread, max(vals) + spread)
        hull = bound if hull is None else hull.hull(bound)
    if hull is None:
        raise IntervalDomainError("expression undefined on the whole interval")
    return hull


@dataclass
class ZeroIsolation:
    points: list[tuple[float, float]] = field(default_factory=list)  # (lo, hi) brackets
    intervals: list[tuple[float, float]] = field(default_factory=list)
    inconclusive: list[tuple[float, float]] = field(default_factory=list)


def isolate_zeros(e: Expr, a: float, b: float, resolution: float,
                  max_cells: int = 200_000) -> ZeroIsolation:
    """Cells of [a, b] where e may vanish, grouped into point brackets and
    identically-zero intervals."""
    out = ZeroIsolation()
    zero_cells: list[tuple[float, float]] = []
    small_cells: list[tuple[float, float]] = []
    stack = [(a, b)]
    cells = 0
    while stack:
        lo, hi = stack.pop()
        cells += 1
        if cells > max_cells:
            out.inconclusive.append((lo, hi))
            continue
        try:
            bound = eval_interval(e, Interval(lo, hi))
        except IntervalDomainError:
            continue
        if not bound.contains(0.0):
            continue
        if bound.lo == 0.0 and bound.hi == 0.0:
            zero_cells.append((lo, hi))
        elif hi - lo <= resolution:
            small_cells.append((lo, hi))
        else:
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                small_cells.append((lo, hi))
            else:
                stack += [(lo, mid), (mid, hi)]
    tagged = sorted([(lo, hi, True) for lo, hi in zero_cells] + [(lo, hi, False) for lo, hi in small_cells])
    clusters: list[list] = []
    for lo, hi, is_zero in tagged:
        if clusters and lo <= clusters[-1][1]:
            clusters[-1][1] = max(clusters[-1][1], hi)
            clusters[-1][2] |= is_zero
        else:
            clusters.append([lo, hi, is_zero])
    for lo, hi, has_zero in clusters:
        if has_zero and hi - lo > 64 * resolution:
            out.intervals.append((lo, hi))
        elif hi - lo <= 64 * resolution:
            out.points.append((lo, hi))
        else:
            out.inconclusive.append((lo, hi))
    out.inconclusive.sort()
    return out
