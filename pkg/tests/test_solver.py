from __future__ import annotations

import math

import numpy as np
import pytest
from scipy.integrate import quad

from filippov1d.corpus import CORPUS, UNIQUE_STARTS
from filippov1d.field import build_field
from filippov1d.oracle import validate_trajectory
from filippov1d.solver import (
    ARRIVAL,
    CLASSICAL,
    FILIPPOV_EXACT,
    STICK,
    WINDOW_EXIT,
    ClassicalSelectionError,
    PreconditionError,
    VerdictError,
    classical_select,
    make_grid,
    solve_classical,
    solve_filippov,
    time_of_flight,
    witnesses_condition_A,
    witnesses_condition_B,
)

DENSE_PM1 = "on (-inf,-1]: 1; dense on (-1,1): {-1, 1} measure builtin-fat-cantor; on [1,inf): -1"


# --- time of flight ----------------------------------------------------------------------

def test_tof_constant(fields):
    assert time_of_flight(fields["constant"], 0.0, 2.0).value == pytest.approx(2.0, abs=1e-14)


def test_tof_divergent():
    f = build_field("on (-inf,inf): x", (-2, 2))
    assert time_of_flight(f, 0.0, 1.0).status == "infinite"
    assert time_of_flight(f, 1.0, 0.0).status == "infinite"


def test_tof_sqrt_singularity(fields):
    fl = time_of_flight(fields["one-plus-sqrt"], 0.0, 1.0)
    assert fl.value == pytest.approx(2 - 2 * math.log(2), abs=1e-12)
    # independent adaptive-quadrature oracle at 1e-9
    ref, _ = quad(lambda y: 1 / (1 + math.sqrt(y)), 0, 1, epsabs=1e-12)
    assert fl.value == pytest.approx(ref, abs=1e-9)


def test_tof_convergent_endpoint_zero(fields):
    # integral of y^-1/2 over (0, 1] is 2
    fl = time_of_flight(fields["sqrt-abs"], 0.0, 1.0)
    assert fl.status == "finite" and fl.value == pytest.approx(2.0, abs=1e-10)


def test_tof_log_endpoint(fields):
    # -x log x vanishes like z |log z|: arrival at 0 takes infinite time
    assert time_of_flight(fields["x-log-x"], 0.5, 0.0).status == "infinite"
    # at 1 the field vanishes linearly as well
    assert time_of_flight(fields["x-log-x"], 0.5, 1.0).status == "infinite"
    fl = time_of_flight(fields["x-log-x"], 0.3, 0.6)
    ref, _ = quad(lambda y: -1 / (y * math.log(y)), 0.3, 0.6, epsabs=1e-13)
    assert fl.value == pytest.approx(ref, abs=1e-10)


def test_tof_dense_uses_measure(fields):
    f = fields["dense-1-2"]
    c = f.components[0]
    mu = c.oracle.measure(0.0, 1.5)
    assert time_of_flight(f, 0.0, 1.5).value == pytest.approx(mu / 1 + (1.5 - mu) / 2, rel=1e-12)


def test_tof_interior_zero(fields):
    with pytest.raises(PreconditionError):
        time_of_flight(fields["minus-sign"], -1.0, 1.0)


# --- solve_filippov ----------------------------------------------------------------------

def test_solve_minus_sign():
    f = CORPUS["minus-sign"].build()
    traj = solve_filippov(f, 1.0, 2.0, [0, 0.5, 1, 1.5, 2])
    assert traj.samples == [(0.0, 1.0), (0.5, 0.5), (1.0, 0.0), (1.5, 0.0), (2.0, 0.0)]
    kinds = {(e.kind, e.t) for e in traj.events}
    assert (ARRIVAL, 1.0) in kinds and (STICK, 1.0) in kinds
    assert traj.meta["method"] == FILIPPOV_EXACT


def test_solve_one_plus_sqrt_inverse(fields):
    t = 2 - 2 * math.log(2)
    traj = solve_filippov(fields["one-plus-sqrt"], 0.0, 1.0, [0.0, t, 0.613706])
    assert traj.x[1] == pytest.approx(1.0, abs=1e-12)
    assert traj.x[2] == pytest.approx(1.0, abs=1e-6)


def test_solve_x_log_x_against_fine_euler(fields):
    traj = solve_filippov(fields["x-log-x"], 0.5, 1.0, [0.0, 1.0])
    closed = math.exp(math.exp(-1) * math.log(0.5))
    assert traj.x[-1] == pytest.approx(closed, abs=1e-12)
    # explicit stepping at dt = 1e-6 (first order, error ~ 1e-7)
    x, dt = 0.5, 1e-6
    for _ in range(1_000_000):
        x -= dt * x * math.log(x)
    assert traj.x[-1] == pytest.approx(x, abs=1e-6)
    assert traj.x[-1] == pytest.approx(0.7749207, abs=1e-6)


def test_solve_starting_at_zero_sticks(fields):
    traj = solve_filippov(fields["minus-sign"], 0.0, 1.0, 0.25)
    assert np.all(traj.x == 0.0)
    assert traj.events[0].kind == STICK


def test_solve_x0_exact(fields):
    traj = solve_filippov(fields["x-log-x"], 0.123456789, 1.0, 0.1)
    assert traj.x[0] == 0.123456789


def test_solve_window_exit():
    f = build_field("on (-inf,inf): 1", (-1, 1))
    traj = solve_filippov(f, 0.0, 3.0, 0.5)
    assert traj.t[-1] <= 1.0
    assert any(e.kind == WINDOW_EXIT for e in traj.events)


def test_solve_refuses_non_unique(fields):
    with pytest.raises(VerdictError):
        solve_filippov(fields["heaviside"], 0.0, 1.0)
    with pytest.raises(VerdictError):
        solve_filippov(fields["dense-1-2"], 0.0, 1.0, force=True)


def test_solve_force_is_maximal_delay(fields):
    traj = solve_filippov(fields["heaviside"], 0.0, 1.0, 0.25, force=True)
    assert np.all(traj.x == 0.0)
    assert traj.meta["canonical"] == "maximal-delay"


def test_solve_crosses_breakpoint():
    f = build_field("on (-inf,0): 1; on [0,inf): 2", (-5, 5))
    traj = solve_filippov(f, -1.0, 2.0, 0.5)
    assert traj.samples == [(0.0, -1.0), (0.5, -0.5), (1.0, 0.0), (1.5, 1.0), (2.0, 2.0)]


# --- classical selection -----------------------------------------------------------------

def test_classical_dense_time_of_flight(fields):
    f = fields["dense-1-2"]
    sf = classical_select(f)
    traj = solve_classical(sf, 0.0, 2.0, 0.05)
    mu = f.components[0].oracle
    for t, x in traj.samples:
        G = mu.measure(0.0, x) + (x - mu.measure(0.0, x)) / 2
        assert G == pytest.approx(t, abs=1e-9)
    assert traj.meta["method"] == CLASSICAL


def test_classical_override_field(fields):
    sf = classical_select(fields["constant-override"])
    assert sf.value(0.0) == 1.0
    traj = solve_classical(sf, 0.0, 1.0, 0.1)
    assert traj.x == pytest.approx(traj.t, abs=1e-15)


def test_classical_minus_sign(fields):
    sf = classical_select(fields["minus-sign"])
    assert sf.value(0.0) == 0.0
    assert np.all(solve_classical(sf, 0.0, 1.0, 0.1).x == 0.0)


def test_classical_heaviside_refused(fields):
    with pytest.raises(ClassicalSelectionError):
        classical_select(fields["heaviside"])


# --- witnesses ----------------------------------------------------------------------------

def test_witness_B_sqrt_family(fields):
    f = fields["sqrt-abs"]
    trajs = witnesses_condition_B(f, 0.0, [0.5, 1.0], 3.0)
    assert np.all(trajs[0].x == 0.0)
    for c, tr in zip([0.5, 1.0], trajs[1:]):
        closed = np.where(tr.t <= c, 0.0, ((tr.t - c) / 2) ** 2)
        assert np.max(np.abs(tr.x - closed)) < 1e-8
    assert trajs[2].at(3.0) == pytest.approx(1.0, abs=1e-12)
    for tr in trajs:
        assert validate_trajectory(f, tr, 1e-8).ok


def test_witness_B_heaviside(fields):
    tr = witnesses_condition_B(fields["heaviside"], 0.0, [0.5], 2.0)[1]
    closed = np.maximum(tr.t - 0.5, 0.0)
    assert np.max(np.abs(tr.x - closed)) < 1e-12


def test_witness_B_precondition(fields):
    with pytest.raises(PreconditionError):
        witnesses_condition_B(fields["minus-sign"], 0.0, [0.5], 1.0)
    with pytest.raises(PreconditionError):
        witnesses_condition_B(fields["constant"], 0.0, [0.5], 1.0)


def test_witness_A_slopes(fields):
    f = fields["dense-1-2"]
    x1, x2 = witnesses_condition_A(f, x0=0.0, t_end=1.0)
    assert np.array_equal(x1.x, x1.t)
    assert np.array_equal(x2.x, 2 * x2.t)
    assert np.all(x2.x[1:] - x1.x[1:] > 0)


def test_witness_A_extra_and_precondition(fields):
    trajs = witnesses_condition_A(fields["dense-1-2"], x0=0.0, t_end=1.0, extra=1)
    assert [tr.meta["slope"] for tr in trajs] == [1.0, 1.5, 2.0]
    with pytest.raises(PreconditionError):
        witnesses_condition_A(build_field(DENSE_PM1, (-5, 5)))


def test_witnesses_distinct(fields):
    trajs = witnesses_condition_B(fields["sqrt-abs"], 0.0, [0.5, 1.0], 3.0)
    for i in range(len(trajs)):
        for j in range(i):
            assert np.max(np.abs(trajs[i].x - trajs[j].x)) >= 1e-3


# --- properties ------------------------------------------------------------------------------

@pytest.mark.parametrize("name", list(UNIQUE_STARTS))
def test_time_reparametrization_identity(fields, name):
    f = fields[name]
    x0 = UNIQUE_STARTS[name]
    traj = solve_filippov(f, x0, 1.0, 0.01)
    arrival = min([e.t for e in traj.events if e.kind == ARRIVAL], default=math.inf)
    for t, x in traj.samples[1:]:
        if t < arrival and x != x0:
            assert time_of_flight(f, x0, x).value == pytest.approx(t, abs=1e-9)


@pytest.mark.parametrize("name", list(UNIQUE_STARTS))
def test_comparison_principle_small(fields, name):
    f = fields[name]
    lo, hi = f.window
    starts = np.linspace(lo + 0.1 * (hi - lo), hi - 0.6 * (hi - lo), 6)
    grid = make_grid(1.0, 0.05)
    trajs = [solve_filippov(f, float(x), 1.0, grid).x for x in starts]
    for a, b in zip(trajs, trajs[1:]):
        n = min(len(a), len(b))
        assert np.all(a[:n] <= b[:n] + 1e-9)


@pytest.mark.parametrize("name", list(UNIQUE_STARTS))
def test_flow_map_continuity_probe(fields, name):
    f = fields[name]
    x0 = UNIQUE_STARTS[name]
    base = solve_filippov(f, x0, 1.0, 0.05).x
    gaps = []
    for h in (1e-2, 1e-4, 1e-6, 1e-8):
        x = solve_filippov(f, x0 + h, 1.0, 0.05).x
        n = min(len(x), len(base))
        gaps.append(float(np.max(np.abs(x[:n] - base[:n]))))
    assert gaps[-1] < 1e-4
    assert all(b <= a + 1e-12 for a, b in zip(gaps, gaps[1:]))
