from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from translin.bounds import (
    INITIAL_PI_BOUNDS, PI_UNCERTAIN, Poly, exp_taylor, get_concavity,
    get_tangent_bounds, poly_approx, sign_region, sin_bound, sin_taylor,
)

import oracle

L_PI = INITIAL_PI_BOUNDS[0]


def test_poly_basics():
    p = Poly((1, 2, 0, 0))
    assert p.coeffs == (1, 2)
    assert p.degree == 1
    assert exp_taylor(3)(Fraction(1)) == Fraction(8, 3)
    assert exp_taylor(3).derivative().derivative() == Poly((1, 1))
    assert sin_taylor(1) == Poly((0, 1, 0, Fraction(-1, 6)))
    assert Poly((1, 2, 3)).reflect()(Fraction(2)) == Poly((1, 2, 3))(Fraction(-2))


def test_exp_at_zero_is_exact():
    pair = poly_approx("exp", 0, Fraction(1, 8))
    assert pair.lo == pair.hi == 1
    assert pair.exact


def test_exp_positive_center():
    pair = poly_approx("exp", 1, Fraction(1, 8))
    assert pair.degree == 3
    assert (pair.lo, pair.hi) == (Fraction(8, 3), Fraction(64, 23))
    assert pair.width == Fraction(8, 69)
    assert pair.upper == exp_taylor(3).scale(Fraction(24, 23))


def test_exp_negative_center():
    pair = poly_approx("exp", -1, Fraction(1, 8))
    assert pair.degree == 3
    assert (pair.lo, pair.hi) == (Fraction(1, 3), Fraction(3, 8))


def test_sin_center_one():
    pair = poly_approx("sin", 1, Fraction(1, 10))
    assert pair.degree == 1
    assert (pair.lo, pair.hi) == (Fraction(19, 24), Fraction(7, 8))
    assert pair.upper == sin_bound(1, True)


def test_bad_arguments():
    with pytest.raises(ValueError):
        poly_approx("exp", 1, 0)
    with pytest.raises(ValueError):
        poly_approx("cos", 1, Fraction(1, 10))


def test_concavity_examples():
    assert get_concavity("exp", -7) == 1
    assert get_concavity("sin", 1) == -1
    assert get_concavity("sin", -1) == 1
    assert get_concavity("sin", 0) == 0
    assert get_concavity("sin", Fraction(63, 20)) == PI_UNCERTAIN
    # strictly between the two initial bounds
    assert L_PI < Fraction(62831, 20000) < INITIAL_PI_BOUNDS[1]
    assert get_concavity("sin", Fraction(62831, 20000)) == PI_UNCERTAIN
    assert get_concavity("sin", L_PI) == -1
    # a tighter bracket settles the same point
    tight = (Fraction(103993, 33102), Fraction(104348, 33215))
    assert get_concavity("sin", Fraction(31415, 10000), tight) == -1


def test_tangent_bounds_examples():
    r = get_tangent_bounds("exp", 1, exp_taylor(3), lower=True)
    assert r.lo == -1 and r.hi is None
    up = poly_approx("sin", 1, Fraction(1, 10)).upper
    r = get_tangent_bounds("sin", 1, up, lower=False)
    assert 1 in r and r.lo >= 0 and r.hi <= L_PI
    r = get_tangent_bounds("sin", -1, up.reflect().scale(-1), lower=True)
    assert -1 in r and r.lo >= -L_PI and r.hi <= 0


def test_sign_region_point_when_wrong_sign():
    q = Poly((1, 1))  # 1 + x
    assert sign_region(q, -2, 1).is_point
    assert sign_region(q, 0, 1).lo == -1


centers_exp = st.fractions(min_value=-20, max_value=20, max_denominator=1000)
centers_sin = st.fractions(min_value=-L_PI, max_value=L_PI, max_denominator=1000)
eps_exp = st.integers(1, 6).map(lambda k: Fraction(1, 10 ** k))


@settings(max_examples=60, deadline=None)
@given(centers_exp, eps_exp)
def test_exp_parity(c, eps):
    pair = poly_approx("exp", c, eps)
    if c < 0:
        assert pair.degree % 2 == 1
        assert pair.lower == exp_taylor(pair.degree)
        assert pair.upper == exp_taylor(pair.degree + 1)


@settings(max_examples=40, deadline=None)
@given(st.one_of(centers_exp.map(lambda c: ("exp", c)), centers_sin.map(lambda c: ("sin", c))),
       st.integers(1, 5))
def test_monotone_tightening(fc, k):
    fn, c = fc
    wide = poly_approx(fn, c, Fraction(1, 10 ** k))
    narrow = poly_approx(fn, c, Fraction(1, 10 ** (k + 1)))
    assert wide.lo <= narrow.lo <= narrow.hi <= wide.hi


@settings(max_examples=40, deadline=None)
@given(st.one_of(centers_exp.map(lambda c: ("exp", c)), centers_sin.map(lambda c: ("sin", c))),
       eps_exp)
def test_bracket_against_oracle(fc, eps):
    fn, c = fc
    pair = poly_approx(fn, c, eps)
    assert pair.width <= eps
    if pair.exact:
        assert c == 0
    else:
        assert oracle.strictly_inside(fn, c, pair.lo, pair.hi)


def _grid(lo, hi, n):
    return [lo + (hi - lo) * k / (n - 1) for k in range(n)]


@pytest.mark.parametrize("fn, c, eps", [
    ("exp", Fraction(1), Fraction(1, 8)),
    ("exp", Fraction(-3, 2), Fraction(1, 100)),
    ("exp", Fraction(5), Fraction(1, 1000)),
    ("sin", Fraction(1), Fraction(1, 10)),
    ("sin", Fraction(-5, 2), Fraction(1, 100)),
    ("sin", Fraction(3), Fraction(1, 10000)),
])
@pytest.mark.parametrize("lower", [True, False])
def test_tangent_safety(fn, c, eps, lower):
    pair = poly_approx(fn, c, eps)
    poly = pair.lower if lower else pair.upper
    dom = pair.lower_domain if lower else pair.upper_domain
    r = get_tangent_bounds(fn, c, poly, lower=lower, domain=dom)
    assert c in r
    if r.is_point:
        return
    lo = r.lo if r.lo is not None else c - 20
    hi = r.hi if r.hi is not None else c + 20
    slope, at = poly.derivative()(c), poly(c)
    for x in _grid(lo, hi, 1000):
        t = at + slope * (x - c)
        a, b = oracle.enclose(fn, x)
        if lower:
            assert t <= b
        else:
            assert t >= a
