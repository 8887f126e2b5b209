"""Certified polynomial bounds for exp and sin at rational points.

All arithmetic is exact. ``poly_approx`` expands the Maclaurin series until the
window ``[P_l(c), P_u(c)]`` is at most ``epsilon`` wide; ``get_tangent_bounds``
finds where a tangent of the chosen polynomial is guaranteed to stay on the
safe side of the true function.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .core import FULL_LINE, Interval

INITIAL_PI_BOUNDS = (Fraction(333, 106), Fraction(355, 113))
PI_UNCERTAIN = "pi-uncertain"
DEGREE_FLOOR = 200


class DegreeLimit(ArithmeticError):
    pass


@dataclass(frozen=True)
class Poly:
    """Univariate polynomial with rational coefficients, index = degree."""

    coeffs: tuple = ()

    def __post_init__(self):
        cs = [Fraction(c) for c in self.coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def __call__(self, x) -> Fraction:
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def derivative(self) -> "Poly":
        return Poly(tuple(i * c for i, c in enumerate(self.coeffs) if i))

    def scale(self, k) -> "Poly":
        return Poly(tuple(k * c for c in self.coeffs))

    def __add__(self, other: "Poly") -> "Poly":
        a, b = self.coeffs, other.coeffs
        n = max(len(a), len(b))
        return Poly(tuple((a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0)
                          for i in range(n)))

    def __neg__(self) -> "Poly":
        return self.scale(-1)

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def reflect(self) -> "Poly":
        """p(-x)."""
        return Poly(tuple(-c if i % 2 else c for i, c in enumerate(self.coeffs)))

    def leading(self) -> Fraction:
        return self.coeffs[-1]


def exp_taylor(n: int) -> Poly:
    cs, f = [], 1
    for i in range(n + 1):
        if i:
            f *= i
        cs.append(Fraction(1, f))
    return Poly(tuple(cs))


def sin_taylor(n: int) -> Poly:
    """sum_{k<=n} (-1)^k x^(2k+1)/(2k+1)!"""
    cs = [Fraction(0)] * (2 * n + 2)
    for k in range(n + 1):
        cs[2 * k + 1] = Fraction((-1) ** k, math.factorial(2 * k + 1))
    return Poly(tuple(cs))


def sin_remainder(n: int) -> Poly:
    """x^(2(n+1))/(2(n+1))!"""
    m = 2 * (n + 1)
    cs = [Fraction(0)] * m + [Fraction(1, math.factorial(m))]
    return Poly(tuple(cs))


def sin_bound(n: int, upper: bool) -> Poly:
    t, r = sin_taylor(n), sin_remainder(n)
    return t + r if upper else t - r


@dataclass(frozen=True)
class PolyPair:
    """Lower/upper polynomials bracketing ``fn`` at ``center``.

    ``lower_domain``/``upper_domain`` record where each polynomial is a
    certified bound of the true function, not just at the center.
    """

    fn: str
    lower: Poly
    upper: Poly
    center: Fraction
    epsilon: Fraction
    degree: int
    lower_domain: Interval = field(default=FULL_LINE)
    upper_domain: Interval = field(default=FULL_LINE)

    @property
    def lo(self) -> Fraction:
        return self.lower(self.center)

    @property
    def hi(self) -> Fraction:
        return self.upper(self.center)

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def exact(self) -> bool:
        return self.lo == self.hi


def _degree_cap(c: Fraction, min_degree: int = 0) -> int:
    return DEGREE_FLOOR + 3 * math.ceil(abs(c)) + min_degree


def poly_approx(fn: str, c, epsilon, min_degree: int = 0) -> PolyPair:
    """Return the minimal-degree :class:`PolyPair` of width <= ``epsilon`` at ``c``.

    ``min_degree`` forces a higher degree than the width alone would need.
    """
    c, eps = Fraction(c), Fraction(epsilon)
    if eps <= 0:
        raise ValueError("epsilon must be positive")
    if fn == "exp":
        return _exp_pair(c, eps, min_degree)
    if fn == "sin":
        return _sin_pair(c, eps, min_degree)
    raise ValueError(f"unsupported function {fn!r}")


def _exp_pair(c: Fraction, eps: Fraction, min_degree: int) -> PolyPair:
    if c == 0:
        one = Poly((Fraction(1),))
        return PolyPair("exp", one, one, c, eps, 0,
                        lower_domain=Interval(Fraction(0), None),
                        upper_domain=Interval(None, Fraction(0)))
    cap = _degree_cap(c, min_degree)
    # running T_n(c) and c^n/n!
    term = Fraction(1)
    total = Fraction(1)
    n = 0
    if c < 0:
        while True:
            n += 1
            term = term * c / n
            total += term
            if n % 2 == 0:
                continue
            nxt = term * c / (n + 1)  # c^(n+1)/(n+1)!, positive
            if nxt <= eps and n >= min_degree:
                return PolyPair("exp", exp_taylor(n), exp_taylor(n + 1), c, eps, n,
                                lower_domain=FULL_LINE,
                                upper_domain=Interval(None, Fraction(0)))
            if n > cap:
                raise DegreeLimit(f"exp({c}) needs degree > {cap}")
    while True:
        n += 1
        term = term * c / n
        total += term
        r = term * c / (n + 1)
        if r < 1 and total * r / (1 - r) <= eps and n >= min_degree:
            lower = exp_taylor(n)
            upper = lower.scale(1 / (1 - r))
            return PolyPair("exp", lower, upper, c, eps, n,
                            lower_domain=FULL_LINE if n % 2 else Interval(Fraction(0), None),
                            upper_domain=Interval(Fraction(0), c))
        if n > cap:
            raise DegreeLimit(f"exp({c}) needs degree > {cap}")


def _sin_pair(c: Fraction, eps: Fraction, min_degree: int) -> PolyPair:
    # The remainder bound uses |sin^(k)| <= 1, so both polynomials are valid
    # bounds everywhere, not only near c.
    cap = _degree_cap(c, min_degree)
    c2 = c * c
    rem = c2 * c2 / 24  # n = 1: c^4/4!
    n = 1
    while 2 * rem > eps or n < min_degree:
        n += 1
        m = 2 * (n + 1)
        rem = rem * c2 / ((m - 1) * m)
        if n > cap:
            raise DegreeLimit(f"sin({c}) needs degree > {cap}")
    return PolyPair("sin", sin_bound(n, False), sin_bound(n, True), c, eps, n)


# ---------------------------------------------------------------------------
# Concavity


def _pi_bounds(ctx) -> tuple:
    if ctx is None:
        return INITIAL_PI_BOUNDS
    if isinstance(ctx, tuple):
        return ctx
    return ctx.pi_bounds


def get_concavity(fn: str, c, ctx=None):
    """Sign of the second derivative of ``fn`` at ``c``, or :data:`PI_UNCERTAIN`.

    For sin, ``c`` is a base-period value; the answer is only known when
    ``|c| <= l_pi``. Anything further out is reported as uncertain, since a
    base value can only land there while the bracket on pi is still loose.
    """
    c = Fraction(c)
    if fn == "exp":
        return 1
    if fn != "sin":
        raise ValueError(f"unsupported function {fn!r}")
    lo_pi, hi_pi = _pi_bounds(ctx)
    if abs(c) <= lo_pi:
        return (c < 0) - (c > 0)
    return PI_UNCERTAIN


# ---------------------------------------------------------------------------
# Sign regions by Sturm sequences


def _primitive(p: Poly) -> Poly:
    if p.is_zero():
        return p
    return p.scale(1 / abs(p.leading()))


def _rem(a: Poly, b: Poly) -> Poly:
    r = list(a.coeffs)
    db, lb = b.degree, b.leading()
    while len(r) - 1 >= db and any(r):
        k = r[-1] / lb
        shift = len(r) - 1 - db
        for i, bc in enumerate(b.coeffs):
            r[shift + i] -= k * bc
        r.pop()
        while r and r[-1] == 0:
            r.pop()
    return Poly(tuple(r))


class _Sturm:
    def __init__(self, p: Poly):
        seq = [_primitive(p), _primitive(p.derivative())]
        while not seq[-1].is_zero() and seq[-1].degree > 0:
            r = _rem(seq[-2], seq[-1])
            if r.is_zero():
                break
            seq.append(_primitive(-r))
        self.seq = [s for s in seq if not s.is_zero()]

    @staticmethod
    def _changes(signs) -> int:
        signs = [s for s in signs if s]
        return sum(1 for a, b in zip(signs, signs[1:]) if a != b)

    def variations(self, x) -> int:
        return self._changes([(v > 0) - (v < 0) for v in (s(x) for s in self.seq)])

    def variations_inf(self) -> int:
        return self._changes([(s.leading() > 0) - (s.leading() < 0) for s in self.seq])

    def roots_between(self, a, b) -> int:
        """Distinct real roots in (a, b]; ``b=None`` means +infinity."""
        vb = self.variations_inf() if b is None else self.variations(b)
        return self.variations(a) - vb


def _right_extent(q: Poly, c: Fraction, want: int, tol: Fraction) -> Optional[Fraction]:
    """Largest certified ``b >= c`` with ``want*q >= 0`` on ``[c, b]``.

    Returns ``None`` for +infinity. ``q(c)`` is assumed to have the right sign
    or to be zero.
    """
    if q.is_zero():
        return None
    if q.degree == 0:
        return None if want * q.coeffs[0] >= 0 else c
    if q.degree == 1:
        root = -q.coeffs[0] / q.coeffs[1]
        slope_ok = want * q.coeffs[1] >= 0
        if root <= c:
            return None if slope_ok else c
        return root if not slope_ok else None
    st = _Sturm(q)
    if st.roots_between(c, None) == 0:
        probe = c + 1
        return None if want * q(probe) >= 0 else c
    hi = c + 1
    while st.roots_between(c, hi) == 0:
        hi = c + 2 * (hi - c)
    lo = c
    # bisect until (c, lo] is root free, (lo, hi] holds the first root, and the gap is small
    while lo == c or hi - lo > tol:
        mid = (lo + hi) / 2
        if st.roots_between(c, mid) == 0:
            lo = mid
        else:
            hi = mid
        if q(hi) == 0 and st.roots_between(c, hi) == 1 and lo > c and hi - lo <= tol:
            break
    if want * q(lo) < 0:
        return c
    if q(hi) == 0 and st.roots_between(c, hi) == 1:
        return hi
    return lo


def sign_region(q: Poly, c, want: int, tol=Fraction(1, 10**6)) -> Interval:
    """Conservative closed interval around ``c`` on which ``want*q >= 0``.

    Degenerates to the point ``[c, c]`` when ``q`` has the wrong sign at ``c``.
    """
    c = Fraction(c)
    if want * q(c) < 0:
        return Interval.point(c)
    right = _right_extent(q, c, want, tol)
    left = _right_extent(q.reflect(), -c, want, tol)
    return Interval(None if left is None else -left, right)


def get_tangent_bounds(fn: str, c, poly: Poly, *, lower: bool,
                       domain: Interval = FULL_LINE, ctx=None) -> Interval:
    """Interval containing ``c`` on which the tangent of ``poly`` at ``c`` is safe.

    ``lower`` selects a tangent asserting ``f(x) >= T(x)`` (needs ``poly``
    convex and below ``f``); otherwise ``f(x) <= T(x)`` (``poly`` concave and
    above ``f``). ``domain`` is where ``poly`` is a certified bound of ``f``.
    A point interval signals that no safe neighbourhood was found.
    """
    c = Fraction(c)
    if c not in domain:
        return Interval.point(c)
    region = sign_region(poly.derivative().derivative(), c, 1 if lower else -1)
    if fn == "sin":
        lo_pi = _pi_bounds(ctx)[0]
        if c > 0 or (c == 0 and not lower):
            base = Interval(Fraction(0), lo_pi)
        else:
            base = Interval(-lo_pi, Fraction(0))
        region = region.intersect(base) or Interval.point(c)
    elif fn != "exp":
        raise ValueError(f"unsupported function {fn!r}")
    return region.intersect(domain) or Interval.point(c)
