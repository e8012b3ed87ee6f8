from __future__ import annotations

import math

import numpy as np
import pytest
from scipy.optimize import brentq

from filippov1d.dsl import parse_field, render
from filippov1d.dsl.ast import FieldSpec, Override
from filippov1d.envelope import Envelope, envelope, envelope_hull, is_continuity_point, zero_set
from filippov1d.field import FieldError, build_field


def test_heaviside_jump(fields):
    assert envelope(fields["heaviside"], 0.0) == Envelope(0.0, 1.0)


def test_dense_field_everywhere(fields):
    f = fields["dense-1-2"]
    for x in (-10.0, -3.3, 0.0, 0.3, 9.99, 10.0):
        assert envelope(f, x) == Envelope(1.0, 2.0)


def test_override_is_invisible(fields):
    assert envelope(fields["constant-override"], 0.0) == Envelope(1.0, 1.0)


def test_outside_window(fields):
    with pytest.raises(FieldError):
        envelope(fields["constant"], 11.0)


def test_continuity_points(fields):
    s = fields["sign"]
    assert is_continuity_point(s, 0.5)
    assert not is_continuity_point(s, 0.0)
    assert not is_continuity_point(fields["dense-1-2"], 0.3)


def test_removable_singularity_value(fields):
    f = fields["x-log-x"]
    assert envelope(f, 0.0) == Envelope(0.0, 0.0)
    assert envelope(f, math.exp(-1)).m == pytest.approx(math.exp(-1), rel=1e-15)


def test_zero_set_examples(fields):
    assert zero_set(fields["minus-sign"]).items() == [0.0]
    assert zero_set(fields["one-plus-sqrt"]).items() == []
    assert zero_set(fields["heaviside"]).intervals == ((-10.0, 0.0),)


def test_zero_set_x_log_x_against_bisection(fields):
    zs = zero_set(fields["x-log-x"])

    def b(x):
        return 0.0 if x == 0 else -x * math.log(abs(x))

    # independent oracle: sign changes on a grid that avoids the roots, refined by brentq
    grid = np.linspace(-2, 2, 4000)
    roots = [brentq(b, a, c, xtol=1e-15) for a, c in zip(grid, grid[1:]) if b(a) * b(c) < 0]
    assert len(roots) == 3
    assert list(zs.points) == pytest.approx(roots, abs=1e-12)


def test_zero_set_identically_zero_stretch():
    f = build_field("on (-inf,inf): max(0, x-1) + min(0, x+1)", (-10, 10))
    zs = zero_set(f)
    assert zs.points == ()
    assert zs.intervals == ((-1.0, 1.0),)


def test_zero_set_dense_straddling():
    f = build_field("on (-inf,-1]: 1; dense on (-1,1): {-1, 1} measure builtin-fat-cantor; on [1,inf): -1", (-5, 5))
    assert zero_set(f).intervals == ((-1.0, 1.0),)


def test_zero_set_irrational_root():
    f = build_field("on (-inf,inf): 2 - x^2", (-3, 3))
    pts = zero_set(f).points
    assert pts == pytest.approx([-math.sqrt(2), math.sqrt(2)], abs=1e-10)


def test_envelope_hull_covers_pointwise_envelopes(fields):
    f = fields["x-log-x"]
    H = envelope_hull(f, -0.7, 0.4)
    for x in np.linspace(-0.7, 0.4, 201):
        env = envelope(f, float(x))
        assert H.lo <= env.m and env.M <= H.hi


# --- properties of the envelope --------------------------------------------------------

def _probe_points(f, rng, n):
    lo, hi = f.window
    pts = list(rng.uniform(lo, hi, n))
    pts += [p for p in (*f.breakpoints, *f.critical_points) if lo < p < hi]
    pts += [p for p in zero_set(f).boundary_points() if lo < p < hi]
    return [float(p) for p in pts]


@pytest.mark.parametrize("name", ["constant-override", "sqrt-abs", "heaviside", "one-plus-sqrt",
                                  "x-log-x", "minus-sign", "sign", "dense-1-2"])
def test_semicontinuity(fields, name):
    """m is lower and M upper semicontinuous."""
    f = fields[name]
    rng = np.random.default_rng(1)
    lo, hi = f.window
    for x in _probe_points(f, rng, 150):
        env = envelope(f, x)
        # the defect must vanish as h -> 0; sqrt-type pieces still move by sqrt(h)
        for h in (1e-10, 1e-12):
            ys = [min(max(x + s * h, lo), hi) for s in (-1.0, -0.5, 0.5, 1.0)]
            envs = [envelope(f, y) for y in ys]
            assert env.m <= min(e.m for e in envs) + 1e-4
            assert env.M >= max(e.M for e in envs) - 1e-4


@pytest.mark.parametrize("name", ["one-plus-sqrt", "x-log-x", "minus-sign", "sign", "dense-1-2", "heaviside"])
def test_neighbourhood_excludes_zero(fields, name):
    f = fields[name]
    rng = np.random.default_rng(2)
    lo, hi = f.window
    for x in _probe_points(f, rng, 150):
        env = envelope(f, x)
        if not env.excludes_zero():
            continue
        found = False
        for k in range(1, 40):
            d = 2.0 ** -k
            ys = np.clip(x + d * np.linspace(-1, 1, 9), lo, hi)
            if all(envelope(f, float(y)).excludes_zero() for y in ys):
                found = True
                break
        assert found, x


def test_discontinuity_set(fields):
    rng = np.random.default_rng(3)
    for name, f in fields.items():
        for x in _probe_points(f, rng, 50):
            env = envelope(f, x)
            assert is_continuity_point(f, x) == (env.m == env.M)
            if name == "dense-1-2":
                assert not is_continuity_point(f, x)
            elif x not in f.breakpoints and x not in f.critical_points:
                assert is_continuity_point(f, x)


@pytest.mark.parametrize("name", ["constant", "sqrt-abs", "heaviside", "x-log-x", "sign", "dense-1-2"])
def test_null_set_insensitivity(fields, name):
    f = fields[name]
    rng = np.random.default_rng(4)
    lo, hi = f.window
    pts = rng.uniform(lo, hi, 10)
    spec = f.spec
    modified = FieldSpec(spec.pieces, spec.overrides + tuple(Override(float(p), float(v))
                                                            for p, v in zip(pts, rng.normal(0, 5, 10))),
                         spec.dense_segments)
    g = build_field(parse_field(render(modified)), f.window)
    for x in [*_probe_points(f, rng, 100), *map(float, pts)]:
        assert envelope(g, x) == envelope(f, x)
