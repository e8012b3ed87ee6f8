from __future__ import annotations

import math

from hypothesis import given, settings
from hypothesis import strategies as st

from filippov1d.dsl import eval_expr, eval_interval, parse_expr
from filippov1d.interval import Interval, iabs, ilog, ipow, isign


def test_outward_rounding_contains_exact_sum():
    s = Interval(0.1, 0.1) + Interval(0.2, 0.2)
    assert s.lo <= 0.3 <= s.hi
    assert s.lo < s.hi


def test_exact_operations_stay_exact():
    assert Interval(1.0, 1.0) + Interval(2.0, 2.0) == Interval(3.0, 3.0)
    assert Interval(0.0, 0.0) * Interval(-5.0, 7.0) == Interval(0.0, 0.0)
    assert Interval(0.0, 0.0) + Interval(0.0, 0.0) == Interval(0.0, 0.0)


def test_reciprocal_through_zero_is_unbounded():
    r = Interval(-1.0, 2.0).reciprocal()
    assert math.isinf(r.lo) and math.isinf(r.hi)
    assert Interval(0.0, 2.0).reciprocal().hi == math.inf


def test_elementary_functions():
    assert isign(Interval(0.5, 3.0)) == Interval(1.0, 1.0)
    assert isign(Interval(-1.0, 1.0)) == Interval(-1.0, 1.0)
    assert iabs(Interval(-2.0, 1.0)) == Interval(0.0, 2.0)
    half = ipow(Interval(4.0, 9.0), 0.5)
    assert half.lo <= 2.0 and half.hi >= 3.0
    assert ilog(Interval(1.0, math.e)).contains(0.5)


EXPRS = [parse_expr(s) for s in (
    "1 + abs(x)^0.5", "-x*log(abs(x))", "max(0, x-1) + min(0, x+1)", "exp(x)/(1+x^2)",
    "sqrt(abs(x)) - sign(x)", "2 - x^2",
)]


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(EXPRS), st.floats(-5, 5), st.floats(0, 2), st.floats(0, 1))
def test_enclosure_contains_point_values(e, a, w, frac):
    """Interval evaluation over [a, a+w] bounds the value at every point."""
    x = a + frac * w
    try:
        v = eval_expr(e, x)
    except ArithmeticError:
        return
    bound = eval_interval(e, Interval(a, a + w))
    assert bound.lo <= v <= bound.hi
