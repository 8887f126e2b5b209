"""Model lifting and the universal-interval satisfiability check."""

from __future__ import annotations

from fractions import Fraction

from .bounds import poly_approx
from .core import (
    PI, Atom, Const, Formula, Not, UF, Var, conj, conjuncts, evaluate, le, lt,
    substitute, walk,
)


def _name(fn: str, c: Fraction) -> str:
    if c.denominator == 1:
        return f"y!{fn}!{c.numerator}"
    return f"y!{fn}!{c.numerator}/{c.denominator}"


def ct_variable(fn: str, c: Fraction) -> Var:
    """Deterministic fresh variable standing for ``fn(c)``."""
    return Var(_name(fn, Fraction(c)))


def _definitions(core: Formula, keep: set) -> dict:
    """Top-level ``v = t`` conjuncts usable to eliminate ``v`` (v not in ``keep``)."""
    defs = {}
    for f in conjuncts(core):
        if not (isinstance(f, Atom) and f.rel == "="):
            continue
        for v, t in ((f.lhs, f.rhs), (f.rhs, f.lhs)):
            if (isinstance(v, Var) and v not in keep and v not in defs
                    and v not in set(walk(t))):
                defs[v] = t
                break
    return defs


def _resolve(defs: dict) -> dict:
    """Close ``defs`` under substitution, dropping cyclic entries."""
    out: dict = {}
    for v in list(defs):
        t, seen = defs[v], {v}
        for _ in range(len(defs) + 1):
            hits = [w for w in walk(t) if isinstance(w, Var) and w in defs]
            if not hits:
                break
            if any(w in seen for w in hits):
                t = None
                break
            seen.update(hits)
            t = substitute(t, {w: defs[w] for w in hits})
        if t is not None:
            out[v] = t
    return out


def build_universal_check(core: Formula, mu: dict, bounds: dict, ctx) -> Formula:
    """Quantifier-free matrix of the negated universal check.

    ``bounds`` maps each uf-application to the ``(lb, ub)`` window of its true
    value at the model point. Every variable is fixed to its model value and
    every application becomes a fresh variable ranging over its window; a
    model of the result is an interpretation refuting the abstraction.
    """
    keep = set()
    for app in bounds:
        keep.add(app.args[0])
    defs = _resolve(_definitions(core, keep))
    f = substitute(core, defs) if defs else core
    sigma = {}
    ranges = {}
    for app, (lb, ub) in bounds.items():
        x = app.args[0]
        c = mu[x]
        y = ct_variable(app.fn[1:], c)
        sigma[app] = y
        if y not in ranges:
            ranges[y] = (lb, ub)
    for n in walk(f):
        if isinstance(n, Var) and n not in sigma:
            sigma[n] = Const(mu[n])
    f = substitute(f, sigma)
    parts = []
    for y in sorted(ranges, key=lambda v: v.name):
        lb, ub = ranges[y]
        parts.append(le(Const(lb), y))
        parts.append(le(y, Const(ub)))
    if PI in set(walk(f)):
        lo, hi = ctx.pi_bounds
        parts.append(lt(Const(lo), PI))
        parts.append(lt(PI, Const(hi)))
    parts.append(Not(f))
    return conj(*parts)


def universal_bounds(core: Formula, mu: dict, precision: int, ctx) -> dict:
    """Certified windows for every transcendental application in ``core``."""
    eps = Fraction(1, 10 ** precision)
    out = {}
    for n in walk(core):
        if isinstance(n, UF) and n.fn in ("fexp", "fsin") and n not in out:
            pair = poly_approx(n.fn[1:], mu[n.args[0]], eps)
            out[n] = (pair.lo, pair.hi)
    return out


def exact_lift(core: Formula, mu: dict, ctx) -> bool:
    """True when ``mu`` is already a model of the real formula."""
    if PI in set(walk(core)):
        return False
    for n in walk(core):
        if isinstance(n, UF):
            if n.fn == "fmul":
                a, b = n.args
                if mu[n] != mu[a] * mu[b]:
                    return False
                continue
            if mu[n.args[0]] != 0:
                return False
            exact = Fraction(1) if n.fn == "fexp" else Fraction(0)
            if mu[n] != exact:
                return False
    return evaluate(core, mu) is True


def check_model(problem, mu: dict, precision: int, ctx, backend) -> bool:
    """Whether the real formula is satisfiable around ``mu``."""
    core = ctx.core
    if exact_lift(core, mu, ctx):
        return True
    if backend is None:
        return False
    bounds = universal_bounds(core, mu, precision, ctx)
    query = build_universal_check(core, mu, bounds, ctx)
    outcome = backend.fresh_frame(query)
    return outcome.status == "unsat"
