"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v`` or directly as a script.
"""
from __future__ import annotations

import math

import numpy as np
import pytest

from filippov1d.corpus import CORPUS, UNIQUE_STARTS
from filippov1d.dsl import parse_field, render
from filippov1d.dsl.ast import FieldSpec, Override
from filippov1d.envelope import envelope, is_continuity_point, zero_set
from filippov1d.field import build_field
from filippov1d.oracle import reachable_funnel, validate_trajectory
from filippov1d.solver import (
    classical_select,
    make_grid,
    solve_classical,
    solve_filippov,
    time_of_flight,
    witnesses_condition_A,
    witnesses_condition_B,
)
from filippov1d.uniqueness import INCONCLUSIVE, NON_UNIQUE, OSGOOD, UNIQUE, uniqueness_verdict

TOL = 1e-8


def build(name):
    return CORPUS[name].build()


# 1 ------------------------------------------------------------------------------------------

def test_criterion_1_verdict_table(criterion):
    checks = []
    verdicts = {name: uniqueness_verdict(build(name)) for name in CORPUS}
    for name in ("sqrt-abs", "heaviside"):
        v = verdicts[name]
        checks.append((f"{name} NonUnique(B at 0)",
                       v.status == NON_UNIQUE and v.cause["condition"] == "B" and v.cause["point"] == 0.0))
    checks.append(("one-plus-sqrt Unique", verdicts["one-plus-sqrt"].status == UNIQUE))
    at0 = [z for z in verdicts["x-log-x"].zero_points_checked if z.point == 0.0]
    checks.append(("x-log-x Osgood at 0", len(at0) == 1 and at0[0].verdict.status == OSGOOD))
    v = verdicts["dense-1-2"]
    checks.append(("dense {1,2} NonUnique(A)", v.status == NON_UNIQUE and v.cause["condition"] == "A"))
    for name, v in verdicts.items():
        checks.append((f"{name} expected {CORPUS[name].expected}", v.status == CORPUS[name].expected))
        checks.append((f"{name} not Inconclusive", v.status != INCONCLUSIVE))
    criterion(1, checks)


# 2 ------------------------------------------------------------------------------------------

def test_criterion_2_closed_form_trajectories(criterion):
    checks = []
    grid = np.linspace(0.0, 2.0, 1000)
    for x0 in (0.0, -3.7):
        tr = solve_filippov(build("constant"), x0, 2.0, grid)
        checks.append((f"constant from {x0}", np.max(np.abs(tr.x - (x0 + grid))) < 1e-6))
    tr = solve_filippov(build("minus-sign"), 1.0, 2.0, grid)
    checks.append(("-sign from 1", np.max(np.abs(tr.x - np.maximum(1 - grid, 0.0))) < 1e-6))
    g1 = np.linspace(0.0, 1.0, 1000)
    tr = solve_filippov(build("x-log-x"), 0.5, 1.0, g1)
    closed = np.exp(np.exp(-g1) * math.log(0.5))
    checks.append(("-x log|x| from 0.5", np.max(np.abs(tr.x - closed)) < 1e-6))
    # 0.5**exp(-1) = 0.7749207; the six-digit value 0.775173 quoted with this
    # closed form disagrees with it by 2.5e-4 and is not used
    checks.append(("-x log|x| at t=1 equals 0.5**exp(-1)", abs(tr.x[-1] - 0.5 ** math.exp(-1)) < 1e-6))
    criterion(2, checks)


# 3 ------------------------------------------------------------------------------------------

def test_criterion_3_time_of_flight(criterion):
    fl = time_of_flight(build("one-plus-sqrt"), 0.0, 1.0)
    inf = time_of_flight(build_field("on (-inf,inf): x", (-2, 2)), 0.0, 1.0)
    criterion(3, [("1/(1+sqrt y) over [0,1]", abs(fl.value - (2 - 2 * math.log(2))) < 1e-9),
               ("1/y over [0,1] infinite", inf.status == "infinite" and inf.value == math.inf)])


# 4 ------------------------------------------------------------------------------------------

def _witnesses():
    sqrt_family = witnesses_condition_B(build("sqrt-abs"), 0.0, [0.5, 1.0, 1.5], 3.0, dt_out=1e-3,
                                        validate_tol=None)
    heav = witnesses_condition_B(build("heaviside"), 0.0, [0.5], 2.0, dt_out=1e-3, validate_tol=None)
    dense = witnesses_condition_A(build("dense-1-2"), x0=0.0, t_end=1.0, dt_out=1e-3, validate_tol=None)
    return sqrt_family, heav, dense


def test_criterion_4_witness_validity(criterion):
    checks = []
    sqrt_family, heav, dense = _witnesses()
    for name, trajs in (("sqrt-abs", sqrt_family), ("heaviside", heav), ("dense-1-2", dense)):
        f = build(name)
        for k, tr in enumerate(trajs):
            checks.append((f"{name} witness {k} validates", validate_trajectory(f, tr, TOL).ok))
    for tr in sqrt_family[1:]:
        c = tr.meta["offset"]
        closed = np.where(tr.t <= c, 0.0, ((tr.t - c) / 2) ** 2)
        checks.append((f"X_{c} closed form", np.max(np.abs(tr.x - closed)) < 1e-8))
    x1, x2 = dense
    checks.append(("dense slope 1", np.array_equal(x1.x, x1.t)))
    checks.append(("dense slope 2", np.array_equal(x2.x, 2 * x2.t)))
    criterion(4, checks)


# 5 ------------------------------------------------------------------------------------------

def test_criterion_5_oracle_sandwich_and_convergence(criterion):
    checks = []
    for name, x0 in UNIQUE_STARTS.items():
        f = build(name)
        tr = solve_filippov(f, x0, 1.0, np.linspace(0, 1, 1001))
        for d in (1e-2, 1e-3):
            fun = reachable_funnel(f, x0, 1.0, d, d)
            checks.append((f"{name} solution inside funnel dt={d}", not fun.violations(tr.t, tr.x)))
        width = reachable_funnel(f, x0, 1.0, 1e-4, 1e-4).width[-1]
        checks.append((f"{name} width {width:.2e} < 1e-3", width < 1e-3))
    sqrt_family, heav, dense = _witnesses()
    for name, trajs in (("sqrt-abs", sqrt_family), ("heaviside", heav), ("dense-1-2", dense)):
        f = build(name)
        t_end = float(trajs[0].t[-1])
        x0 = float(trajs[0].x[0])
        for d in (1e-2, 1e-3):
            fun = reachable_funnel(f, x0, t_end, d, d)
            inside = all(not fun.violations(tr.t, tr.x) for tr in trajs)
            checks.append((f"{name} witnesses inside funnel dt={d}", inside))
    f = build("sqrt-abs")
    for d in (1e-2, 1e-3, 1e-4):
        w = reachable_funnel(f, 0.0, 2.0, d, d).width[-1]
        checks.append((f"sqrt width at t=2 dt={d} is {w:.4f} >= 0.9", w >= 0.9))
    criterion(5, checks)


# 6 ------------------------------------------------------------------------------------------

def _probe_points(f, rng, n):
    lo, hi = f.window
    pts = list(rng.uniform(lo, hi, n))
    pts += [p for p in (*f.breakpoints, *f.critical_points, *zero_set(f).boundary_points()) if lo < p < hi]
    return [float(p) for p in pts]


def test_criterion_6_envelope_properties(criterion):
    rng = np.random.default_rng(20261015)
    per_field = math.ceil(10_000 / len(CORPUS))
    null_bad = semi_bad = nbhd_bad = disc_bad = 0
    total = 0
    for name in CORPUS:
        f = build(name)
        lo, hi = f.window
        spec = f.spec
        extra = tuple(Override(float(p), float(v)) for p, v in zip(rng.uniform(lo, hi, 10), rng.normal(0, 5, 10)))
        g = build_field(parse_field(render(FieldSpec(spec.pieces, spec.overrides + extra, spec.dense_segments))),
                        f.window)
        pts = _probe_points(f, rng, per_field) + [o.x for o in extra]
        total += len(pts)
        for x in pts:
            env = envelope(f, x)
            null_bad += envelope(g, x) != env
            disc_bad += is_continuity_point(f, x) != (env.m == env.M)
            # semicontinuity: the defect vanishes on shrinking neighbourhoods
            ys = [min(max(x + s * h, lo), hi) for h in (1e-10, 1e-12) for s in (-1.0, -0.5, 0.5, 1.0)]
            envs = [envelope(f, y) for y in ys]
            semi_bad += not (env.m <= min(e.m for e in envs) + 1e-4 and env.M >= max(e.M for e in envs) - 1e-4)
            if env.excludes_zero():
                ok = False
                for k in range(1, 40):
                    d = 2.0 ** -k
                    if all(envelope(f, float(y)).excludes_zero() for y in np.clip(x + d * np.linspace(-1, 1, 9), lo, hi)):
                        ok = True
                        break
                nbhd_bad += not ok
    criterion(6, [(f"sampled points {total} >= 10^4", total >= 10_000),
               (f"null-set insensitivity ({null_bad} bad)", null_bad == 0),
               (f"semicontinuity ({semi_bad} bad)", semi_bad == 0),
               (f"neighbourhood property ({nbhd_bad} bad)", nbhd_bad == 0),
               (f"discontinuity set ({disc_bad} bad)", disc_bad == 0)])


# 7 ------------------------------------------------------------------------------------------

def test_criterion_7_classical_selector(criterion):
    checks = []
    grid = make_grid(2.0, 0.01)
    xs = {}
    for oracle_tol in (1e-10, 1e-12):
        f = CORPUS["dense-1-2"].build(oracle_tol=oracle_tol)
        tr = solve_classical(classical_select(f), 0.0, 2.0, grid)
        mu = f.components[0].oracle
        err = max(abs(mu.measure(0.0, x) + (x - mu.measure(0.0, x)) / 2 - t) for t, x in tr.samples)
        checks.append((f"|G(X(t)) - t| = {err:.1e} at oracle tol {oracle_tol}", err < 10 * TOL))
        xs[oracle_tol] = tr.x
    diff = float(np.max(np.abs(xs[1e-10] - xs[1e-12])))
    checks.append((f"truncation depth swap moves X by {diff:.1e}", diff < 10 * TOL))
    criterion(7, checks)


# 8 ------------------------------------------------------------------------------------------

def test_criterion_8_comparison_principle(criterion):
    rng = np.random.default_rng(8)
    grid = np.linspace(0.0, 1.0, 101)
    checks = []
    for name in UNIQUE_STARTS:
        f = build(name)
        lo, hi = f.window
        # keep the conservatively reachable range inside the window
        r = f.max_speed() * 1.0
        a, b = lo + r, hi - r
        crossings = 0
        for _ in range(50):
            x0, y0 = sorted(rng.uniform(a, b, 2))
            X = solve_filippov(f, float(x0), 1.0, grid).x
            Y = solve_filippov(f, float(y0), 1.0, grid).x
            crossings += bool(np.any(X > Y + 1e-9))
        checks.append((f"{name}: {crossings} crossing pairs", crossings == 0))
    criterion(8, checks)


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q", "-s"]))
