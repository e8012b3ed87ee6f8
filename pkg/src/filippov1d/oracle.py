"""Brute-force checks of the differential inclusion dX/dt in K[b](X).

Nothing here uses time of flight: the funnel propagates interval bounds of
the envelope, the Euler selections step explicitly, and the validator
compares difference quotients with envelope hulls.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .envelope import envelope, envelope_hull
from .field import Field, FieldError, NotPointwiseDefined, value_ae
from .interval import Interval


class FunnelWindowError(RuntimeError):
    """The over-approximation left the analysis window; ``funnel`` holds the
    part computed so far."""

    def __init__(self, message: str, funnel: "Funnel"):
        super().__init__(message)
        self.funnel = funnel


@dataclass
class Funnel:
    times: np.ndarray
    lo: np.ndarray
    hi: np.ndarray
    dt: float
    dx: float
    # velocity bounds used on step k -> k+1
    vmin: np.ndarray = field(repr=False, default_factory=lambda: np.empty(0))
    vmax: np.ndarray = field(repr=False, default_factory=lambda: np.empty(0))
    truncated: bool = False

    @property
    def width(self) -> np.ndarray:
        return self.hi - self.lo

    def bounds_at(self, t: float) -> tuple[float, float]:
        """Interval containing every solution at time t (any t in range)."""
        if t == 0.0:
            return float(self.lo[0]), float(self.hi[0])
        if t < 0 or t > self.times[-1] + 4 * math.ulp(self.times[-1]):
            raise ValueError(f"t={t!r} outside the funnel")
        k = int(np.searchsorted(self.times, t, side="right")) - 1
        # keep tau safely positive; times are rounded products k*dt
        while k > 0 and t - self.times[k] <= 4 * math.ulp(t):
            k -= 1
        k = min(k, len(self.vmin) - 1)
        tau = Interval(t, t) - Interval(self.times[k], self.times[k])
        tau = Interval(max(0.0, tau.lo - 2 * math.ulp(t)), tau.hi + 2 * math.ulp(t))
        lo = Interval.point(self.lo[k]) + tau * Interval.point(self.vmin[k])
        hi = Interval.point(self.hi[k]) + tau * Interval.point(self.vmax[k])
        return lo.lo, hi.hi

    def violations(self, t, x) -> list[tuple[float, float, float, float]]:
        """Samples (t, x) outside the funnel, as (t, x, lo, hi)."""
        out = []
        for ti, xi in zip(np.asarray(t, float), np.asarray(x, float)):
            if ti > self.times[-1]:
                continue
            lo, hi = self.bounds_at(float(ti))
            if not lo <= xi <= hi:
                out.append((float(ti), float(xi), lo, hi))
        return out

    def to_csv(self) -> str:
        rows = ["t,lo,hi"] + [f"{t!r},{a!r},{b!r}" for t, a, b in
                              zip(self.times.tolist(), self.lo.tolist(), self.hi.tolist())]
        return "\n".join(rows) + "\n"


def reachable_funnel(f: Field, x0: float, t_end: float, dt: float, dx: float) -> Funnel:
    """Interval over-approximation of all Filippov solutions from x0.

    Step k uses the envelope hull H over [lo - r, hi + r] with r = max(dx,
    dt * max|H|), so every solution stays inside the inflated interval
    during the step: lo += dt * min H, hi += dt * max H (outward rounded).
    """
    if not (t_end > 0 and dt > 0 and dx > 0):
        raise ValueError("t_end, dt and dx must be positive")
    w_lo, w_hi = f.window
    if not w_lo <= x0 <= w_hi:
        raise FieldError(f"x0={x0!r} outside the window")
    n = int(math.ceil(t_end / dt - 1e-9))
    times = np.arange(n + 1) * dt
    lo = np.empty(n + 1)
    hi = np.empty(n + 1)
    vmin = np.empty(n)
    vmax = np.empty(n)
    lo[0] = hi[0] = x0
    dt_i = Interval.point(dt)
    r = dx
    for k in range(n):
        a, b = lo[k], hi[k]
        for _ in range(50):
            qa, qb = a - r, b + r
            if qa < w_lo or qb > w_hi:
                part = Funnel(times[: k + 1], lo[: k + 1], hi[: k + 1], dt, dx, vmin[:k], vmax[:k], True)
                raise FunnelWindowError(
                    f"funnel leaves the window at t={float(times[k])!r}; truncated", part)
            H = envelope_hull(f, qa, qb)
            speed = max(abs(H.lo), abs(H.hi))
            need = dt * speed * (1.0 + 1e-9)
            if need <= r:
                break
            r = max(need, 2 * r)
        vmin[k], vmax[k] = H.lo, H.hi
        lo[k + 1] = (Interval.point(a) + dt_i * Interval.point(H.lo)).lo
        hi[k + 1] = (Interval.point(b) + dt_i * Interval.point(H.hi)).hi
        r = dx
    return Funnel(times, lo, hi, dt, dx, vmin, vmax)


# --- Euler selections --------------------------------------------------------------------

MIN_ENVELOPE, MAX_ENVELOPE, AE_VALUE = "min-envelope", "max-envelope", "ae-value"


def euler_selection(f: Field, rule: str, x0: float, dt: float, t_end: float):
    """x_{k+1} = x_k + dt * s(x_k) with s the lower or upper envelope or the
    a.e. value.  Positions are accumulated with compensated summation."""
    from .solver import WITNESS, Trajectory, make_grid

    if rule not in (MIN_ENVELOPE, MAX_ENVELOPE, AE_VALUE):
        raise ValueError(f"unknown selection rule {rule!r}")
    grid = make_grid(t_end, dt)
    xs = np.empty(len(grid))
    xs[0] = x0
    s, comp = x0, 0.0
    lo, hi = f.window
    n = len(grid)
    for k in range(1, len(grid)):
        x = s + comp
        if rule == AE_VALUE:
            v = value_ae(f, x)
            if v is NotPointwiseDefined:
                raise FieldError(f"a.e. value is not pointwise defined at x={x!r}")
        else:
            env = envelope(f, x)
            v = env.m if rule == MIN_ENVELOPE else env.M
        step = (grid[k] - grid[k - 1]) * v
        # Neumaier summation
        t = s + step
        if abs(s) >= abs(step):
            comp += (s - t) + step
        else:
            comp += (step - t) + s
        s = t
        xs[k] = s + comp
        if not lo <= xs[k] <= hi:
            n = k
            break
    return Trajectory(grid[:n].copy(), xs[:n], [], {"x0": x0, "field_id": f.id, "method": WITNESS,
                                                     "selection": rule, "dt": dt})


# --- trajectory validation ------------------------------------------------------------------

@dataclass
class ValidationReport:
    violations: list[tuple[float, float]]
    checked: int

    @property
    def ok(self) -> bool:
        return not self.violations

    def to_dict(self) -> dict:
        return {"ok": self.ok, "checked": self.checked,
                "violations": [{"t": t, "gap": g} for t, g in self.violations]}


def validate_trajectory(f: Field, traj, tol: float) -> ValidationReport:
    """Difference quotients against the envelope hull along each segment."""
    t = np.asarray(traj.t, dtype=float)
    x = np.asarray(traj.x, dtype=float)
    if len(t) >= 2 and np.any(np.diff(t) <= 0):
        raise ValueError("degenerate grid: times must be strictly increasing")
    out = []
    for i in range(len(t) - 1):
        q = (x[i + 1] - x[i]) / (t[i + 1] - t[i])
        a, b = min(x[i], x[i + 1]), max(x[i], x[i + 1])
        H = envelope_hull(f, a, b)
        gap = max(H.lo - q, q - H.hi, 0.0)
        if gap > tol:
            out.append((float(t[i]), float(gap)))
    return ValidationReport(out, max(0, len(t) - 1))
