"""Exact Filippov flow by time of flight, the classical selector and
non-uniqueness witnesses.

Between zeros of the envelope a solution is the inverse of the strictly
monotone map G(x) = integral of dy / b(y) from x0 to x.  Trajectories are
sampled by inverting G incrementally on a time grid; at a zero of the
envelope the solution sticks.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import integrate, optimize

from .dsl.asymptotics import SeriesUnknown, expand, numeric_local_form
from .dsl.ast import Call, Const, Expr
from .dsl.evaluate import DomainError, compile_expr, eval_interval
from .envelope import ZERO_ATOL, EnvelopeError, envelope, piece_limit, zero_set
from .field import Component, Field, FieldError, NotPointwiseDefined, value_ae
from .interval import Interval, IntervalDomainError
from .uniqueness import (
    FAILS,
    INCONCLUSIVE,
    NOT_OSGOOD,
    UNIQUE,
    PreconditionError,
    build_g,
    check_condition_A,
    check_condition_B,
    osgood_classify,
    uniqueness_verdict,
)

FILIPPOV_EXACT = "filippov-exact"
CLASSICAL = "classical-selected"
WITNESS = "witness"

BREAKPOINT_CROSSING = "breakpoint-crossing"
ARRIVAL = "arrival-at-zero"
STICK = "stick"
WINDOW_EXIT = "window-exit"


class SolverError(RuntimeError):
    pass


class VerdictError(SolverError):
    """The requested solve needs a uniqueness verdict the field does not have."""

    def __init__(self, message: str, verdict=None):
        super().__init__(message)
        self.verdict = verdict


# --- trajectories --------------------------------------------------------------------

@dataclass(frozen=True)
class Event:
    t: float
    kind: str
    location: float

    def to_dict(self) -> dict:
        return {"t": self.t, "kind": self.kind, "location": self.location}


@dataclass
class Trajectory:
    t: np.ndarray
    x: np.ndarray
    events: list[Event] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    @property
    def samples(self) -> list[tuple[float, float]]:
        return list(zip(self.t.tolist(), self.x.tolist()))

    def at(self, t: float) -> float:
        """Sample value at a grid time (exact match required)."""
        i = int(np.searchsorted(self.t, t))
        if i >= len(self.t) or self.t[i] != t:
            raise KeyError(f"t={t!r} is not a grid time")
        return float(self.x[i])

    def to_dict(self) -> dict:
        return {
            "meta": self.meta,
            "samples": [{"t": t, "x": x} for t, x in self.samples],
            "events": [e.to_dict() for e in self.events],
        }

    def to_csv(self) -> str:
        rows = ["t,x"] + [f"{t!r},{x!r}" for t, x in self.samples]
        return "\n".join(rows) + "\n"

    def events_json(self) -> str:
        return json.dumps({"meta": self.meta, "events": [e.to_dict() for e in self.events]}, indent=2)


def make_grid(t_end: float, dt: float) -> np.ndarray:
    """Uniform grid 0..t_end; t_end is always the last sample."""
    if not (t_end > 0 and dt > 0):
        raise ValueError("t_end and dt must be positive")
    n = max(1, int(round(t_end / dt)))
    if abs(n * dt - t_end) > 1e-9 * t_end:
        n = int(math.ceil(t_end / dt))
        grid = np.minimum(np.arange(n + 1) * dt, t_end)
        grid[-1] = t_end
        return np.unique(grid)
    return np.linspace(0.0, t_end, n + 1)


def _as_grid(grid, t_end: float) -> np.ndarray:
    if grid is None:
        return make_grid(t_end, t_end / 100)
    if np.isscalar(grid):
        return make_grid(t_end, float(grid))
    g = np.asarray(grid, dtype=float)
    if g.ndim != 1 or len(g) == 0 or np.any(np.diff(g) <= 0) or g[0] < 0:
        raise ValueError("grid must be strictly increasing nonnegative times")
    return g


# --- time of flight ------------------------------------------------------------------

@dataclass(frozen=True)
class Flight:
    """Integral of dy / b(y); status finite, infinite or inconclusive."""

    value: float
    error: float = 0.0
    status: str = "finite"

    @property
    def finite(self) -> bool:
        return self.status == "finite"


def _endpoint_form(e: Expr, p: float, s: int):
    """(alpha, beta) of |e(p + s z)| ~ C z^alpha |log z|^beta, or None."""
    try:
        ser = expand(e, p, s).without_constant(ZERO_ATOL)
        if ser.is_zero:
            return math.inf, 0.0
        _, a, b = ser.lead
        return a, b
    except (SeriesUnknown, DomainError):
        pass
    form = numeric_local_form(Call("abs", (e,)), p, s, z0=1e-3)
    if form.kind == "power-log":
        return form.alpha, form.beta
    if form.kind == "positive-limit":
        return 0.0, 0.0
    return None


def _divergent(alpha: float, beta: float) -> bool:
    return alpha > 1.0 or (alpha == 1.0 and beta <= 1.0)


_QUAD = dict(epsabs=1e-14, epsrel=1e-12, limit=400)


def _quad(fn, a, b) -> tuple[float, float]:
    val, err = integrate.quad(fn, a, b, **_QUAD)
    return val, err


def _singular_end(fe, p: float, s: int, h: float, alpha: float, beta: float) -> tuple[float, float]:
    """Integral of 1/e over the span of length h next to a zero of e at p."""
    if alpha < 1.0:
        q = 1.0 / (1.0 - alpha)
        return _quad(lambda w: q * w ** (q - 1.0) / fe(p + s * w ** q), 0.0, h ** (1.0 / q))
    # alpha == 1 with beta > 1: z = exp(-u)
    return _quad(lambda u: math.exp(-u) / fe(p + s * math.exp(-u)), -math.log(h), math.inf)


def _near_zero(c: Component, p: float, s: int) -> bool:
    try:
        return abs(piece_limit(c, p, s)) <= ZERO_ATOL
    except EnvelopeError:
        return True


def _piece_integral(c: Component, u: float, v: float, depth: int = 0) -> Flight:
    """Integral of dy / e(y) over [u, v] inside one piece (u < v)."""
    e = c.expr
    fe = compile_expr(e)
    try:
        bound = eval_interval(e, Interval(u, v))
    except IntervalDomainError:
        bound = Interval(-math.inf, math.inf)
    def inv(y):
        return 1.0 / fe(y)

    if bound.is_finite() and not bound.contains(0.0):
        val, err = _quad(inv, u, v)
        return Flight(val, err)
    zu, zv = _near_zero(c, u, 1), _near_zero(c, v, -1)
    if not (zu or zv):
        if depth < 12:
            m = 0.5 * (u + v)
            return _combine(_piece_integral(c, u, m, depth + 1), _piece_integral(c, m, v, depth + 1))
        try:
            val, err = _quad(inv, u, v)
            return Flight(val, err)
        except (DomainError, ZeroDivisionError):
            return Flight(math.nan, math.inf, "inconclusive")
    if zu and zv:
        m = 0.5 * (u + v)
        return _combine(_piece_integral(c, u, m, depth + 1), _piece_integral(c, m, v, depth + 1))
    p, s = (u, 1) if zu else (v, -1)
    form = _endpoint_form(e, p, s)
    if form is None:
        return Flight(math.nan, math.inf, "inconclusive")
    sgn = _side_sign(fe, p, s, v - u)
    if _divergent(*form):
        return Flight(sgn * math.inf, 0.0, "infinite")
    h = 0.5 * (v - u)
    try:
        val, err = _singular_end(fe, p, s, h, *form)
    except (DomainError, ZeroDivisionError):
        return Flight(math.nan, math.inf, "inconclusive")
    near = Flight(val, err)
    far = _piece_integral(c, u + h, v, depth + 1) if zu else _piece_integral(c, u, v - h, depth + 1)
    return _combine(near, far)


def _side_sign(fe, p, s, span) -> float:
    for k in range(2, 40):
        try:
            y = fe(p + s * span * 2.0 ** -k)
        except DomainError:
            continue
        if y != 0.0:
            return math.copysign(1.0, y)
    return 1.0


def _combine(a: Flight, b: Flight) -> Flight:
    if "inconclusive" in (a.status, b.status):
        return Flight(math.nan, math.inf, "inconclusive")
    val = a.value + b.value
    if math.isinf(val) or "infinite" in (a.status, b.status):
        if math.isnan(val):
            return Flight(math.nan, math.inf, "inconclusive")
        return Flight(val, 0.0, "infinite")
    return Flight(val, a.error + b.error)


def _dense_integral(c: Component, u: float, v: float, dense) -> Flight:
    length = v - u
    if dense == "mu":
        mu = c.oracle.measure(u, v)
        v1, v2 = c.values
        val = mu / v1 + (length - mu) / v2
        err = c.oracle.tol * abs(1.0 / v1 - 1.0 / v2)
        return Flight(val, err)
    return Flight(length / float(dense))


def _span_flight(f: Field, u: float, v: float, dense="mu") -> Flight:
    """Integral of dy / b(y) from u to v (either orientation)."""
    if u == v:
        return Flight(0.0)
    sign = 1.0
    if u > v:
        u, v, sign = v, u, -1.0
    total = Flight(0.0)
    cuts = [u, *f.nodes_between(u, v), v]
    for a, b in zip(cuts, cuts[1:]):
        c = f.component_at(a, 1)
        if c is None:
            raise FieldError(f"[{a!r}, {b!r}] leaves the window")
        part = _dense_integral(c, a, b, _dense_speed(c, dense, 1)) if c.is_dense else _piece_integral(c, a, b)
        total = _combine(total, part)
    return Flight(sign * total.value, total.error, total.status)


def _dense_speed(c: Component, dense, direction: int):
    """Velocity used on a dense segment: "mu" (measure weighted), "max"
    (fastest value in the direction of motion) or an explicit velocity."""
    if dense == "mu":
        return "mu"
    if dense == "max":
        return max(c.values) if direction > 0 else min(c.values)
    # an explicit velocity is clipped into this segment's value hull
    return min(max(float(dense), min(c.values)), max(c.values))


def time_of_flight(f: Field, a: float, b_pt: float) -> Flight:
    """Time to travel from a to b_pt; zeros of the envelope are allowed only at
    the endpoints.  Dense segments use the measure-weighted reciprocal."""
    zs = zero_set(f)
    lo, hi = min(a, b_pt), max(a, b_pt)
    for p in zs.boundary_points():
        if lo < p < hi:
            raise PreconditionError(f"envelope vanishes at {p!r} between the endpoints")
    for ia, ib in zs.intervals:
        if ia < hi and ib > lo and not (ib <= lo or ia >= hi):
            raise PreconditionError(f"envelope vanishes on [{ia!r}, {ib!r}]")
    return _span_flight(f, a, b_pt)


# --- event-driven engine ---------------------------------------------------------------

class _Leg:
    """Motion from x0 in a fixed direction until a zero of the envelope or
    the window edge."""

    def __init__(self, f: Field, x0: float, direction: int, dense, stop: float, exits: bool):
        self.f, self.x0, self.d, self.dense = f, x0, direction, dense
        self.stop, self.exits = stop, exits
        inner = f.nodes_between(x0, stop)
        self.points = [x0, *(inner if direction > 0 else inner[::-1]), stop]
        self.times = [0.0]
        self._vel: dict[int, float | None] = {}

    def _segment(self, i: int) -> tuple[float, float]:
        return self.points[i], self.points[i + 1]

    def _velocity(self, i: int) -> float | None:
        """Constant velocity on segment i when there is one."""
        a, b = self._segment(i)
        if i in self._vel:
            return self._vel[i]
        c = self.f.component_at(min(a, b), 1)
        v = None
        if c.is_dense:
            sp = _dense_speed(c, self.dense, self.d)
            v = None if sp == "mu" else sp
        else:
            # constant on the open segment, e.g. sign pieces away from 0
            lo, hi = min(a, b), max(a, b)
            eps = 1e-12 * (hi - lo)
            try:
                bound = eval_interval(c.expr, Interval(lo + eps, hi - eps))
                if bound.lo == bound.hi:
                    v = bound.lo
            except IntervalDomainError:
                pass
        self._vel[i] = v
        return v

    def _flight(self, a: float, b: float) -> Flight:
        c = self.f.component_at(min(a, b), 1)
        if c.is_dense:
            sp = _dense_speed(c, self.dense, self.d)
            if sp != "mu":
                return Flight((b - a) / sp)
        return _span_flight(self.f, a, b, self.dense)

    def time_at(self, i: int) -> float:
        """Arrival time at points[i]; inf when unreachable."""
        while len(self.times) <= i:
            k = len(self.times) - 1
            prev = self.times[k]
            if math.isinf(prev):
                self.times.append(math.inf)
                continue
            fl = self._flight(*self._segment(k))
            if fl.status == "inconclusive":
                raise SolverError(f"time of flight over {self._segment(k)} is inconclusive")
            self.times.append(prev + fl.value if fl.finite else math.inf)
        return self.times[i]

    def position(self, i: int, start: float, tau: float) -> float:
        """Point reached from ``start`` (on segment i) after time tau."""
        a, b = self._segment(i)
        if tau <= 0.0:
            return start
        v = self._velocity(i)
        if v is not None:
            x = start + v * tau
            return min(max(x, min(a, b)), max(a, b))
        speed = max(self.f.max_speed(min(a, b), max(a, b)), 1e-300)
        reach = start + self.d * speed * tau * (1.0 + 1e-9)
        end = b if (reach - b) * self.d >= 0 else reach

        def F(x):
            return self._flight(start, x).value - tau

        f_end = F(end)
        k = 1
        while not (f_end >= 0.0 and math.isfinite(f_end)):
            if math.isfinite(f_end) and f_end < 0 and end == b:
                return b
            end = b - (b - start) * 2.0 ** -k
            f_end = F(end)
            k += 1
            if k > 60:
                raise SolverError("could not bracket the inverse time of flight")
        if f_end == 0.0:
            return end
        xtol = 1e-15 * max(1.0, abs(self.f.width))
        return optimize.brentq(F, start, end, xtol=xtol, rtol=4 * np.finfo(float).eps, maxiter=200)


def _march(f: Field, x0: float, times: np.ndarray, dense="mu", direction: int | None = None,
           t_shift: float = 0.0) -> tuple[np.ndarray, np.ndarray, list[Event]]:
    """Positions at ``times`` (relative to the start of motion).

    Returns the used times (truncated at a window exit), positions and events
    (event times shifted by ``t_shift``).
    """
    lo, hi = f.window
    if not lo <= x0 <= hi:
        raise FieldError(f"x0={x0!r} outside the window")
    events: list[Event] = []
    if direction is None:
        env = envelope(f, x0)
        if env.contains(0.0, ZERO_ATOL):
            events.append(Event(t_shift, STICK, x0))
            return times, np.full(len(times), x0, dtype=float), events
        direction = 1 if env.m > 0 else -1
    zs = zero_set(f)
    stop = zs.next_in_direction(x0, direction)
    exits = stop is None
    if exits:
        stop = hi if direction > 0 else lo
    if stop == x0:
        events.append(Event(t_shift, WINDOW_EXIT, x0))
        return times[:1], np.array([x0]), events
    leg = _Leg(f, x0, direction, dense, stop, exits)
    n_seg = len(leg.points) - 1
    xs = np.empty(len(times))
    i = 0
    cur_x, cur_t = x0, 0.0
    crossed = 0
    used = len(times)
    for j, t in enumerate(times):
        while i < n_seg and leg.time_at(i + 1) <= t:
            i += 1
            cur_x, cur_t = leg.points[i], leg.time_at(i)
        while crossed < i:
            crossed += 1
            p = leg.points[crossed]
            if crossed < n_seg and p in f.breakpoints:
                events.append(Event(t_shift + leg.time_at(crossed), BREAKPOINT_CROSSING, p))
        if i == n_seg:
            if exits and t > leg.time_at(n_seg):
                used = j
                break
            xs[j] = stop
            continue
        if leg._velocity(i) is not None:
            # measured from the segment start: one rounding, no accumulation
            cur_x = leg.position(i, leg.points[i], t - leg.time_at(i))
        else:
            cur_x = leg.position(i, cur_x, t - cur_t)
        cur_t = t
        xs[j] = cur_x
    if math.isfinite(leg.time_at(n_seg)) and (leg.time_at(n_seg) <= times[-1]):
        t_stop = t_shift + leg.time_at(n_seg)
        if exits:
            events.append(Event(t_stop, WINDOW_EXIT, stop))
        else:
            events += [Event(t_stop, ARRIVAL, stop), Event(t_stop, STICK, stop)]
    return times[:used], xs[:used], events


def _trajectory(f, x0, grid, dense, method, direction=None, meta=None, delay: float = 0.0) -> Trajectory:
    """Rest at x0 until ``delay``, then march; a zero delay starts at once."""
    grid = np.asarray(grid, dtype=float)
    n_rest = int(np.sum(grid <= delay)) if delay > 0 else 0
    events: list[Event] = [Event(0.0, STICK, x0)] if delay > 0 else []
    xs = np.full(n_rest, x0, dtype=float)
    rel = grid[n_rest:] - delay
    if len(rel):
        used_t, ys, ev = _march(f, x0, rel, dense, direction, t_shift=delay)
        xs = np.concatenate([xs, ys])
        events += ev
    out = Trajectory(grid[: len(xs)].copy(), xs, events, {"x0": x0, "field_id": f.id, "method": method})
    if meta:
        out.meta.update(meta)
    return out


# --- Filippov solutions ------------------------------------------------------------------

def reachable_window(f: Field, x0: float, t_end: float) -> tuple[float, float]:
    r = f.max_speed() * t_end
    lo, hi = f.window
    return max(lo, x0 - r), min(hi, x0 + r)


def solve_filippov(f: Field, x0: float, t_end: float, grid=None, force: bool = False) -> Trajectory:
    """The unique Filippov solution from x0.

    Requires a Unique verdict on the conservatively reachable window.  With
    ``force`` the canonical maximal-delay solution is returned instead: it
    never leaves a zero of the envelope.  That choice is unambiguous only
    when condition A holds, so ``force`` is refused otherwise.
    """
    grid = _as_grid(grid, t_end)
    window = reachable_window(f, x0, t_end)
    verdict = uniqueness_verdict(f, window)
    if verdict.status != UNIQUE:
        if not force:
            raise VerdictError(f"uniqueness verdict is {verdict.status}; use witnesses or force", verdict)
        if check_condition_A(f, window).status == FAILS:
            raise VerdictError("no canonical Filippov solution when condition A fails; "
                               "use the classical selector", verdict)
    method = FILIPPOV_EXACT
    meta = {"verdict": verdict.status}
    if force and verdict.status != UNIQUE:
        meta["canonical"] = "maximal-delay"
    return _trajectory(f, x0, grid, "mu", method, meta=meta)


# --- classical selection --------------------------------------------------------------------

@dataclass(frozen=True)
class SelectedField:
    """The canonical representative: zero where 0 is in K[b], the piece value
    elsewhere, and measure-weighted time of flight on dense segments."""

    base: Field

    def value(self, x: float):
        env = envelope(self.base, x)
        if env.contains(0.0, ZERO_ATOL):
            return 0.0
        c = self.base.component_containing(x)
        if c is not None and c.is_dense:
            return NotPointwiseDefined
        if env.m == env.M:
            return env.m
        v = value_ae(self.base, x)
        if x in self.base.overrides or not env.contains(v):
            return env.m
        return v

    def time_of_flight(self, a: float, b: float) -> Flight:
        return time_of_flight(self.base, a, b)


class ClassicalSelectionError(SolverError):
    pass


def classical_select(f: Field, window: tuple[float, float] | None = None) -> SelectedField:
    checks, undecided = check_condition_B(f, window)
    bad = [c for c in checks if c.verdict.status != "Osgood"]
    if bad:
        c = bad[0]
        raise ClassicalSelectionError(
            f"condition B is {c.verdict.status} at {c.point!r}; no classical selection")
    if undecided:
        raise ClassicalSelectionError(f"zero set undecided on {undecided[0]}")
    return SelectedField(f)


def solve_classical(sf: SelectedField, x0: float, t_end: float, grid=None) -> Trajectory:
    grid = _as_grid(grid, t_end)
    return _trajectory(sf.base, x0, grid, "mu", CLASSICAL)


# --- witnesses --------------------------------------------------------------------------

def _validated(f: Field, trajs: list[Trajectory], tol: float) -> list[Trajectory]:
    from .oracle import validate_trajectory

    for tr in trajs:
        report = validate_trajectory(f, tr, tol)
        if report.violations:
            t, gap = report.violations[0]
            raise SolverError(f"witness failed validation at t={t!r} (gap {gap!r})")
    return trajs


def witnesses_condition_B(f: Field, x0: float, offsets: Sequence[float], t_end: float,
                          dt_out: float = 1e-3, validate_tol: float | None = 1e-8) -> list[Trajectory]:
    """The constant solution plus X_c (rest until c, then leave x0 along the
    side where g is not Osgood), one per offset."""
    try:
        g = build_g(f, x0)
    except PreconditionError as exc:
        raise PreconditionError(f"x0={x0!r} is not a zero of the envelope: {exc}") from None
    verdict = osgood_classify(g)
    if verdict.status != NOT_OSGOOD:
        raise PreconditionError(f"condition B is {verdict.status} at {x0!r}; no witnesses")
    side = 1 if verdict.failing_side == "right" else -1
    grid = make_grid(t_end, dt_out)
    out = [_trajectory(f, x0, grid, "max", WITNESS, direction=side, delay=math.inf,
                       meta={"family": "condition-B", "offset": None})]
    for c in offsets:
        if c < 0:
            raise ValueError("offsets must be nonnegative")
        out.append(_trajectory(f, x0, grid, "max", WITNESS, direction=side, delay=float(c),
                               meta={"family": "condition-B", "offset": float(c), "side": verdict.failing_side}))
    if validate_tol is not None:
        _validated(f, out, validate_tol)
    return out


def witnesses_condition_A(f: Field, window: tuple[float, float] | None = None, x0: float | None = None,
                          t_end: float = 1.0, dt_out: float = 1e-3, extra: int = 0,
                          validate_tol: float | None = 1e-8) -> list[Trajectory]:
    """Extreme constant selections on a dense segment whose values exclude 0,
    plus ``extra`` intermediate constant selections."""
    cond = check_condition_A(f, window)
    if cond.status != FAILS:
        raise PreconditionError("condition A holds; no dense segment with a nonzero envelope")
    a, b = cond.region
    if x0 is None:
        x0 = a
    seg = f.component_at(x0, 1)
    if seg is None or not seg.is_dense:
        raise PreconditionError(f"x0={x0!r} does not start a dense segment")
    v_lo, v_hi = min(seg.values), max(seg.values)
    speeds = [v_lo, v_hi]
    speeds[1:1] = [v_lo + (v_hi - v_lo) * k / (extra + 1) for k in range(1, extra + 1)]
    grid = make_grid(t_end, dt_out)
    out = []
    for v in speeds:
        out.append(_trajectory(f, x0, grid, v, WITNESS, direction=1 if v > 0 else -1,
                               meta={"family": "condition-A", "slope": v}))
    if validate_tol is not None:
        _validated(f, out, validate_tol)
    return out
