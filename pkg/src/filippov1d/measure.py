"""Measure oracles for dense two-valued field segments.

A dense segment takes one value on a set ``A`` and another off it.  Membership
in ``A`` is never queried pointwise; everything downstream only needs
``mu(a, x) = |A ∩ [a, x]|``.

The built-in set is a Rudin-type construction: every dyadic subinterval of
the window receives a Smith-Volterra-Cantor set placed inside a gap left by
all previously placed sets, together with a reserved twin that stays outside
``A``.  Hence both ``A`` and its complement meet every interval in positive
measure.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable


class MeasureOracleError(ValueError):
    pass


class MeasureOracle:
    """Contract: ``measure(a, x)`` approximates ``|A ∩ [a, x]|`` within ``tol``."""

    tol: float = 0.0
    rudin_dense: bool = False

    def measure(self, a: float, x: float) -> float:
        raise NotImplementedError

    def __call__(self, a: float, x: float) -> float:
        return self.measure(a, x)


@dataclass(frozen=True)
class SmithVolterraCantor:
    """SVC set on [left, left + width]: at generation k the middle of every
    remaining interval is removed, each removal of length ``width * 4**-(k+1)``.
    Total measure is ``width / 2``."""

    left: float
    width: float

    @property
    def right(self) -> float:
        return self.left + self.width

    @property
    def total(self) -> float:
        return 0.5 * self.width

    def gap(self, node_left: float, node_right: float, gen: int) -> tuple[float, float]:
        c = 0.5 * (node_left + node_right)
        g = 0.5 * self.width * 4.0 ** -(gen + 1)
        return c - g, c + g

    def cdf(self, x: float, depth: int) -> float:
        """|S ∩ (-inf, x]|, exact except for the one node cut at ``depth``."""
        if x <= self.left:
            return 0.0
        if x >= self.right:
            return self.total
        lo, hi = self.left, self.right
        node_measure = self.total
        acc = 0.0
        for gen in range(depth):
            g_lo, g_hi = self.gap(lo, hi, gen)
            node_measure *= 0.5
            if x <= g_lo:
                hi = g_lo
            elif x < g_hi:
                return acc + node_measure
            else:
                acc += node_measure
                lo = g_hi
        return acc + node_measure * (x - lo) / (hi - lo)

    def free_subinterval(self, lo: float, hi: float) -> tuple[float, float]:
        """An open subinterval of (lo, hi) disjoint from this set."""
        if hi <= self.left or lo >= self.right:
            return lo, hi
        if lo < self.left:
            return lo, self.left
        if hi > self.right:
            return self.right, hi
        n_lo, n_hi = self.left, self.right
        gen = 0
        while True:
            g_lo, g_hi = self.gap(n_lo, n_hi, gen)
            if hi <= g_lo:
                n_hi = g_lo
            elif lo >= g_hi:
                n_lo = g_hi
            else:
                return max(lo, g_lo), min(hi, g_hi)
            gen += 1
            if gen > 2000:
                raise MeasureOracleError("free-gap search did not terminate")


class SingleSVCOracle(MeasureOracle):
    """One SVC set; not Rudin-dense.  Useful as a reference."""

    def __init__(self, left: float, width: float, tol: float = 1e-12):
        self.svc = SmithVolterraCantor(left, width)
        self.tol = tol
        self.depth = _depth_for(width, tol)
        self.rudin_dense = False

    def measure(self, a: float, x: float) -> float:
        if x <= a:
            return 0.0
        return self.svc.cdf(x, self.depth) - self.svc.cdf(a, self.depth)


def _depth_for(scale: float, tol: float) -> int:
    if not tol > 0:
        raise MeasureOracleError("tolerance must be positive")
    if tol < 1e-15 * max(scale, 1.0):
        raise MeasureOracleError(f"tolerance {tol!r} below representable precision")
    return max(1, math.ceil(math.log2(4.0 * scale / tol)))


class FatCantorUnion(MeasureOracle):
    """Rudin-dense set on [lo, hi] truncated so that ``measure`` is within ``tol``."""

    def __init__(self, lo: float, hi: float, tol: float = 1e-10):
        if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
            raise MeasureOracleError("fat Cantor union needs a bounded window")
        width = hi - lo
        self.lo, self.hi, self.tol = lo, hi, tol
        self.rudin_dense = True
        # cap stage n at width * 2**-(n+1); the sets dropped after `stages`
        # have total measure below tol / 2
        self.stages = _depth_for(width, tol)
        self.depth = _depth_for(width, tol) + 1
        placed: list[SmithVolterraCantor] = []
        members: list[SmithVolterraCantor] = []
        for n, (a, b) in enumerate(_dyadic(lo, hi, self.stages)):
            j_lo, j_hi = a, b
            for s in placed:
                j_lo, j_hi = s.free_subinterval(j_lo, j_hi)
            third = (j_hi - j_lo) / 3.0
            w = min(0.8 * third, width * 2.0 ** -(n + 1))
            inside = SmithVolterraCantor(j_lo + 0.1 * third, w)
            reserved = SmithVolterraCantor(j_lo + 2.0 * third, w)
            placed += [inside, reserved]
            members.append(inside)
        self.members = sorted(members, key=lambda s: s.left)

    def measure(self, a: float, x: float) -> float:
        if x <= a:
            return 0.0
        total = 0.0
        for s in self.members:
            if s.left >= x:
                break
            if s.right <= a:
                continue
            total += s.cdf(x, self.depth) - s.cdf(a, self.depth)
        return min(max(total, 0.0), x - a)


def _dyadic(lo: float, hi: float, count: int):
    """First ``count`` dyadic subintervals of [lo, hi] in breadth-first order."""
    n = 0
    level = 0
    while True:
        k = 2 ** level
        step = (hi - lo) / k
        for i in range(k):
            if n >= count:
                return
            yield lo + i * step, lo + (i + 1) * step
            n += 1
        level += 1


ORACLES: dict[str, Callable[[float, float, float], MeasureOracle]] = {
    "builtin-fat-cantor": lambda lo, hi, tol: FatCantorUnion(lo, hi, tol),
}


def register_oracle(name: str, factory: Callable[[float, float, float], MeasureOracle]):
    """Make ``measure NAME`` usable in field files; factory(lo, hi, tol)."""
    ORACLES[name] = factory


def built_in_fat_cantor_union(window: tuple[float, float], tol: float = 1e-10) -> FatCantorUnion:
    return FatCantorUnion(window[0], window[1], tol)


def check_oracle(oracle: MeasureOracle, lo: float, hi: float, probes: int = 9):
    """Spot-check bounds, monotonicity and additivity on a probe grid."""
    tol = max(oracle.tol, 1e-15)
    xs = [lo + (hi - lo) * i / (probes - 1) for i in range(probes)]
    prev = 0.0
    for x in xs:
        m = oracle.measure(lo, x)
        if not (-tol <= m <= (x - lo) + tol):
            raise MeasureOracleError(f"measure {m!r} outside [0, {x - lo!r}]")
        if m < prev - tol:
            raise MeasureOracleError("measure is not monotone")
        prev = m
    mid = xs[probes // 2]
    if abs(oracle.measure(lo, mid) + oracle.measure(mid, hi) - oracle.measure(lo, hi)) > 2 * tol:
        raise MeasureOracleError("measure is not additive")
