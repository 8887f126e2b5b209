"""Spurious-model detection and lemma generation (tangents, secants, extras)."""

from __future__ import annotations

import bisect
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .abstraction import AbstractionContext, refine_pi
from .bounds import (
    PI_UNCERTAIN, PolyPair, exp_taylor, get_concavity, get_tangent_bounds,
    poly_approx, sin_bound,
)
from .core import (
    PI, Add, Const, Formula, Iff, Implies, Interval, Var, cf_approx, conj,
    disj, eq, evaluate, fold, ge, gt, le, lt, scale, sub,
)

SIMPLIFY_BITS = 64
RECURSION_CAP = 8
EPS_RETRIES = 24


@dataclass(frozen=True)
class Lemma:
    formula: Formula
    kind: str  # tangent | secant-pair | shift | monotonicity | nra | pi-bound
    app: object = None
    center: Optional[Fraction] = None
    # guard region over the app argument, for samplers; None = unbounded
    region: Optional[Interval] = field(default=None, compare=False)


class SecantStore:
    """Points at which secants were drawn, kept sorted per application."""

    def __init__(self):
        self._pts: dict = {}

    def add(self, app, c: Fraction) -> None:
        pts = self._pts.setdefault(app, [])
        i = bisect.bisect_left(pts, c)
        if i == len(pts) or pts[i] != c:
            pts.insert(i, c)

    def points(self, app) -> list:
        return list(self._pts.get(app, ()))

    def neighbors(self, app, c, within: Optional[Interval] = None) -> tuple:
        """``(max{p < c}, min{p > c})`` among stored points, ``None`` if absent."""
        pts = [p for p in self._pts.get(app, ()) if within is None or p in within]
        i = bisect.bisect_left(pts, c)
        lo = pts[i - 1] if i > 0 else None
        j = bisect.bisect_right(pts, c)
        hi = pts[j] if j < len(pts) else None
        return lo, hi


@dataclass
class Refinement:
    sat: bool
    lemmas: list
    precision: int
    flags: set = field(default_factory=set)


def epsilon(precision: int) -> Fraction:
    return Fraction(1, 10 ** precision)


def _oversized(q: Fraction) -> bool:
    return abs(q.numerator).bit_length() > SIMPLIFY_BITS or q.denominator.bit_length() > SIMPLIFY_BITS


def simplify_value(q: Fraction, precision: int) -> Fraction:
    if _oversized(q):
        return cf_approx(q, 10 ** (precision + 2))
    return q


def falsified(lemma: Lemma, mu: dict) -> bool:
    return evaluate(lemma.formula, mu) is False


def _line(c0, slope, x: Var):
    """c0 + slope*x as a term."""
    return fold(Add((Const(Fraction(c0)), scale(slope, x))))


def _guard(region: Interval, x: Var, psi: Formula) -> Formula:
    parts = []
    if region.lo is not None:
        parts.append(le(Const(region.lo), x))
    if region.hi is not None:
        parts.append(le(x, Const(region.hi)))
    if not parts:
        return psi
    return Implies(conj(*parts), psi)


# ---------------------------------------------------------------------------
# Piecewise-linear refinement at one point


def _fn(app) -> str:
    return "exp" if app.fn == "fexp" else "sin"


def _concavity_region(fn: str, c: Fraction, ctx) -> Interval:
    if fn == "exp":
        return Interval()
    lo_pi = ctx.pi_bounds[0]
    return Interval(Fraction(0), lo_pi) if c > 0 else Interval(-lo_pi, Fraction(0))


def _certified_value(fn: str, p: Fraction, pair: PolyPair, upper: bool, eps) -> Fraction:
    """A certified bound of ``fn(p)`` on the requested side."""
    poly, dom = (pair.upper, pair.upper_domain) if upper else (pair.lower, pair.lower_domain)
    if p in dom:
        return poly(p)
    other = poly_approx(fn, p, eps)
    return other.hi if upper else other.lo


def _tangent(app, x: Var, c: Fraction, pair: PolyPair, below: bool, ctx) -> Lemma:
    fn = _fn(app)
    if fn == "exp" and c == 0:
        # the exact constant pair has no useful tangent; 1 + x is global
        poly, dom = exp_taylor(1), Interval()
    elif below:
        poly, dom = pair.lower, pair.lower_domain
    else:
        poly, dom = pair.upper, pair.upper_domain
    region = get_tangent_bounds(fn, c, poly, lower=below, domain=dom, ctx=ctx.pi_bounds)
    steps = 0
    while region.is_point and steps < 64:
        # a higher-degree member of the same family is still a valid bound
        steps += 1
        if fn == "exp":
            poly = exp_taylor(poly.degree + 2)
        else:
            n = (poly.degree - 2) // 2 + 1
            poly = sin_bound(n, upper=not below)
            dom = Interval()
        region = get_tangent_bounds(fn, c, poly, lower=below, domain=dom, ctx=ctx.pi_bounds)
    if region.is_point:
        value = poly(c)
        psi = ge(app, Const(value)) if below else le(app, Const(value))
        return Lemma(Implies(eq(x, Const(c)), psi), "tangent", app, c, region)
    slope = poly.derivative()(c)
    t = _line(poly(c) - slope * c, slope, x)
    psi = ge(app, t) if below else le(app, t)
    return Lemma(_guard(region, x, psi), "tangent", app, c, region)


def _outward(q: Fraction, upper: bool, eps) -> Fraction:
    """Round an oversized ``q`` away from the function onto a grid finer than ``eps``."""
    if not _oversized(q):
        return q
    d = math.ceil(1000 / Fraction(eps))
    return Fraction(math.ceil(q * d) if upper else math.floor(q * d), d)


def _secants(app, x: Var, c: Fraction, pair: PolyPair, below: bool, ctx,
             store: SecantStore, eps, v: Optional[Fraction] = None) -> list:
    fn = _fn(app)
    within = _concavity_region(fn, c, ctx)
    lo_n, hi_n = store.neighbors(app, c, within)
    if lo_n is None:
        lo_n = c - 1
    if hi_n is None:
        hi_n = c + 1
    if within.lo is not None:
        lo_n = max(lo_n, within.lo)
    if within.hi is not None:
        hi_n = min(hi_n, within.hi)
    upper = not below
    fc = pair.hi if upper else pair.lo
    # coarser endpoint values keep lemma coefficients small; at c only while
    # the model point stays on the wrong side
    rc = _outward(fc, upper, eps)
    if v is not None and ((upper and rc < v) or (not upper and rc > v)):
        fc = rc
    out = []
    for a, b in ((lo_n, c), (c, hi_n)):
        if a >= b:
            continue
        fa = fc if a == c else _outward(_certified_value(fn, a, pair, upper, eps), upper, eps)
        fb = fc if b == c else _outward(_certified_value(fn, b, pair, upper, eps), upper, eps)
        slope = (fb - fa) / (b - a)
        s = _line(fa - slope * a, slope, x)
        psi = le(app, s) if upper else ge(app, s)
        region = Interval(a, b)
        out.append(Lemma(_guard(region, x, psi), "secant-pair", app, c, region))
    store.add(app, c)
    return out


def get_lemmas_point(app, mu: dict, pair: PolyPair, ctx: AbstractionContext,
                     store: SecantStore, eps=None) -> list:
    """Tangent or secant lemmas refuting the spurious point ``(mu[x], mu[app])``."""
    x = ctx.base_var.get(app, app.args[0]) if app.fn == "fsin" else app.args[0]
    c, v = pair.center, mu[app]
    fn = _fn(app)
    conc = get_concavity(fn, c, ctx.pi_bounds)
    if conc == PI_UNCERTAIN:
        raise ValueError("concavity is undetermined at this point")
    below = v <= pair.lo
    above = v >= pair.hi
    if not (below or above):
        return []
    if pair.exact:
        below = v < pair.lo
    if (below and conc >= 0) or (not below and conc <= 0):
        return [_tangent(app, x, c, pair, below, ctx)]
    return _secants(app, x, c, pair, below, ctx, store, eps or pair.epsilon, v)


# ---------------------------------------------------------------------------
# Extra refinements


def _exp_monotonicity(mu: dict, ctx: AbstractionContext) -> list:
    out = []
    apps = ctx.fexp
    for i in range(len(apps)):
        for j in range(i + 1, len(apps)):
            p, q = apps[i], apps[j]
            xp, xq = mu[p.args[0]], mu[q.args[0]]
            fp, fq = mu[p], mu[q]
            if xp > xq or (xp == xq and fp < fq):
                p, q, xp, xq, fp, fq = q, p, xq, xp, fq, fp
            if (xp < xq and fp >= fq) or (xp == xq and fp != fq):
                f = Iff(lt(p.args[0], q.args[0]), lt(p, q))
                out.append(Lemma(f, "monotonicity", (p, q)))
    return out


def shift_of(x_val: Fraction, pi_val: Fraction) -> int:
    # floor rather than truncation: the guard then always contains x_val
    q = (x_val + pi_val) / (2 * pi_val)
    return q.numerator // q.denominator


def _shift_lemmas(mu: dict, ctx: AbstractionContext) -> list:
    out = []
    if not ctx.ext_apps:
        return out
    p = mu[PI]
    for app in ctx.ext_apps:
        x, y = app.args[0], ctx.base_var[app]
        s = shift_of(mu[x], p)
        if mu[y] == mu[x] - 2 * s * p:
            continue
        guard = conj(le(scale(2 * s - 1, PI), x), le(x, scale(2 * s + 1, PI)))
        f = Implies(guard, eq(y, sub(x, scale(2 * s, PI))))
        out.append(Lemma(f, "shift", app, Fraction(s)))
    return out


def _sin_monotonicity(mu: dict, ctx: AbstractionContext) -> list:
    out = []
    apps = ctx.base_apps
    if len(apps) < 2:
        return out
    p = mu[PI]
    h = p / 2
    half_pi = scale(Fraction(1, 2), PI)
    neg_half_pi = scale(Fraction(-1, 2), PI)
    neg_pi = scale(-1, PI)
    for i in range(len(apps)):
        for j in range(i + 1, len(apps)):
            a1, a2 = apps[i], apps[j]
            y1, y2 = a1.args[0], a2.args[0]
            v1, v2 = mu[y1], mu[y2]
            if v1 == v2:
                continue
            if v1 > v2:
                a1, a2, y1, y2, v1, v2 = a2, a1, y2, y1, v2, v1
            s1, s2 = mu[a1], mu[a2]
            if -h <= v1 and v2 <= h and s1 >= s2:
                f = Implies(conj(le(neg_half_pi, y1), lt(y1, y2), le(y2, half_pi)), lt(a1, a2))
            elif -p <= v1 and v2 <= -h and s1 <= s2:
                f = Implies(conj(le(neg_pi, y1), lt(y1, y2), le(y2, neg_half_pi)), gt(a1, a2))
            elif h <= v1 and v2 <= p and s1 <= s2:
                f = Implies(conj(le(half_pi, y1), lt(y1, y2), le(y2, PI)), gt(a1, a2))
            else:
                continue
            out.append(Lemma(f, "monotonicity", (a1, a2)))
    return out


def refine_extra(problem, mu: dict, ctx: AbstractionContext) -> list:
    """Exp monotonicity, sin shift and sin monotonicity lemmas violated by ``mu``."""
    return _exp_monotonicity(mu, ctx) + _shift_lemmas(mu, ctx) + _sin_monotonicity(mu, ctx)


# ---------------------------------------------------------------------------
# Products


def _plane_lemma(app, a, b, alpha, beta, w) -> Optional[Lemma]:
    ca, cb = Const(alpha), Const(beta)
    if a == b:
        # squares: the lower plane holds everywhere, the upper one only at alpha
        plane = fold(Add((scale(2 * alpha, a), Const(-alpha * alpha))))
        f = ge(app, plane) if w < alpha * alpha else Implies(eq(a, ca), le(app, plane))
        return Lemma(f, "nra", app, (alpha, beta))
    plane = fold(Add((scale(beta, a), scale(alpha, b), Const(-alpha * beta))))
    if w < alpha * beta:
        guard = disj(conj(ge(a, ca), ge(b, cb)), conj(le(a, ca), le(b, cb)))
        f = Implies(guard, ge(app, plane))
    else:
        guard = disj(conj(le(a, ca), ge(b, cb)), conj(ge(a, ca), le(b, cb)))
        f = Implies(guard, le(app, plane))
    return Lemma(f, "nra", app, (alpha, beta))


def nra_refine(problem, mu: dict, ctx: AbstractionContext, precision: int = 2) -> list:
    """Tangent-plane lemmas for products whose model value is inconsistent."""
    out = []
    for app in ctx.fmul:
        a, b = app.args
        alpha, beta, w = mu[a], mu[b], mu[app]
        if w == alpha * beta:
            continue
        lemma = None
        sa, sb = simplify_value(alpha, precision), simplify_value(beta, precision)
        if (sa, sb) != (alpha, beta):
            lemma = _plane_lemma(app, a, b, sa, sb, w)
            if not falsified(lemma, mu):
                lemma = None
        if lemma is None:
            lemma = _plane_lemma(app, a, b, alpha, beta, w)
        out.append(lemma)
    return out


# ---------------------------------------------------------------------------
# One refinement round


def _app_point(app, mu: dict, ctx: AbstractionContext):
    x = ctx.base_var[app] if app.fn == "fsin" else app.args[0]
    return x, mu[x], mu[app]


def _spurious(pair: PolyPair, v: Fraction) -> bool:
    if pair.exact:
        return v != pair.lo
    return v <= pair.lo or v >= pair.hi


def _lemmas_for(app, mu, c, c_key, eps, ctx, store) -> list:
    """Try successively tighter pairs until some lemma is falsified by ``mu``."""
    fn = _fn(app)
    min_deg = 0
    for _ in range(EPS_RETRIES):
        pair = poly_approx(fn, c_key, eps, min_deg)
        if not _spurious(pair, mu[app]):
            return []
        lemmas = get_lemmas_point(app, mu, pair, ctx, store, eps)
        if any(falsified(lm, mu) for lm in lemmas):
            return lemmas
        min_deg = pair.degree + (2 if fn == "exp" and c_key < 0 else 1)
    return []


def check_refine(problem, mu: dict, precision: int, ctx: AbstractionContext,
                 store: SecantStore, backend=None, depth: int = 0,
                 cap: int = RECURSION_CAP, deadline: Optional[float] = None) -> Refinement:
    """Look for spurious points in ``mu``; certify it when none are found."""
    from .satcheck import check_model

    eps = epsilon(precision)
    lemmas = list(nra_refine(problem, mu, ctx, precision))
    flags: set = set()
    pi_done = False
    apps = list(ctx.fexp) + list(ctx.base_apps)
    for app in apps:
        x, c, v = _app_point(app, mu, ctx)
        fn = _fn(app)
        pair = poly_approx(fn, c, eps)
        if not _spurious(pair, v):
            continue
        if fn == "sin" and get_concavity("sin", c, ctx.pi_bounds) == PI_UNCERTAIN:
            if not pi_done:
                lemmas.append(Lemma(refine_pi(ctx), "pi-bound"))
                pi_done = True
            continue
        found = []
        c_simple = simplify_value(c, precision)
        if c_simple != c and (fn == "exp" or get_concavity("sin", c_simple, ctx.pi_bounds)
                              == get_concavity("sin", c, ctx.pi_bounds)):
            found = _lemmas_for(app, mu, c, c_simple, eps, ctx, store)
        if not found:
            found = _lemmas_for(app, mu, c, c, eps, ctx, store)
        if not found:
            flags.add("no-progress")
        lemmas.extend(found)
    if lemmas:
        return Refinement(False, lemmas, precision, flags)
    if check_model(problem, mu, precision, ctx, backend):
        return Refinement(True, [], precision, flags)
    if depth >= cap or (deadline is not None and time.monotonic() > deadline):
        flags.add("needs-precision")
        return Refinement(False, [], precision, flags)
    return check_refine(problem, mu, precision + 1, ctx, store, backend,
                        depth + 1, cap, deadline)
