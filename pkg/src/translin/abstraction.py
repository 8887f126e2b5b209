"""Abstraction of transcendental and product terms into uninterpreted functions."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .core import (
    PI, ONE, ZERO, Add, App, Const, Formula, Iff, Implies, Mul, Neg,
    PiSymbol, TranslinError, UF, UF_OF, Var, children, conj, disj, eq, fold,
    gt, le, lt, rebuild, scale, sub, to_smtlib, walk,
)
from .frontend import Problem, normalize

# Consecutive continued-fraction convergents of pi, (even, odd) index pairs
# starting at 333/106. Each lower entry is below pi and each upper above it.
PI_TABLE = (
    (Fraction(333, 106), Fraction(355, 113)),
    (Fraction(103993, 33102), Fraction(104348, 33215)),
    (Fraction(208341, 66317), Fraction(312689, 99532)),
    (Fraction(833719, 265381), Fraction(1146408, 364913)),
    (Fraction(4272943, 1360120), Fraction(5419351, 1725033)),
    (Fraction(80143857, 25510582), Fraction(165707065, 52746197)),
    (Fraction(245850922, 78256779), Fraction(411557987, 131002976)),
    (Fraction(1068966896, 340262731), Fraction(2549491779, 811528438)),
    (Fraction(6167950454, 1963319607), Fraction(14885392687, 4738167652)),
    (Fraction(21053343141, 6701487259), Fraction(1783366216531, 567663097408)),
    (Fraction(3587785776203, 1142027682075), Fraction(5371151992734, 1709690779483)),
    (Fraction(8958937768937, 2851718461558), Fraction(139755218526789, 44485467702853)),
)


class TableExhausted(TranslinError):
    """No tighter bracket for pi is available."""


def fexp(x: Var) -> UF:
    return UF("fexp", (x,))


def fsin(x) -> UF:
    return UF("fsin", (x,))


def fmul(a, b) -> UF:
    a, b = sorted((a, b), key=to_smtlib)
    return UF("fmul", (a, b))


def base_name(x: Var) -> str:
    return f"y!{x.name}"


@dataclass
class AbstractionContext:
    ftf_map: dict = field(default_factory=dict)  # App -> UF
    fexp: list = field(default_factory=list)
    fsin: list = field(default_factory=list)  # every fsin application
    base_var: dict = field(default_factory=dict)  # fsin(x) -> y_x
    base_apps: list = field(default_factory=list)  # fsin(y_x)
    fmul: list = field(default_factory=list)
    core: Formula = None  # the abstracted input formula
    uses_pi: bool = False
    pi_index: int = 0
    declarations: dict = field(default_factory=dict)

    @property
    def pi_bounds(self) -> tuple:
        return PI_TABLE[self.pi_index]

    @property
    def ftf(self) -> list:
        return self.fexp + self.fsin

    @property
    def ext_apps(self) -> list:
        base = set(self.base_apps)
        return [a for a in self.fsin if a not in base]

    def arg(self, app: UF):
        return app.args[0]

    def tracked(self) -> list:
        """Symbols whose values the backend should report, in a fixed order."""
        out = {}
        for n in self.declarations:
            if self.declarations[n] == "Real":
                out[Var(n)] = None
        for y in self.base_var.values():
            out[y] = None
        if self.uses_pi:
            out[PI] = None
        for a in self.fexp + self.fsin + self.fmul:
            out[a] = None
        return list(out)


def _pi_constraint(lo: Fraction, hi: Fraction) -> Formula:
    return conj(lt(Const(lo), PI), lt(PI, Const(hi)))


def _is_leaf(t) -> bool:
    return isinstance(t, (Var, PiSymbol))


def _abstract(f, ctx: AbstractionContext):
    memo = {}

    def go(n):
        if n in memo:
            return memo[n]
        kids = children(n)
        out = n
        if kids:
            new = tuple(go(k) for k in kids)
            out = n if new == kids else rebuild(n, new)
        if isinstance(out, App):
            x = out.arg
            if not isinstance(x, Var):
                raise TranslinError("transcendental argument is not a variable; flatten first")
            uf = UF(UF_OF[out.fn], (x,))
            ctx.ftf_map.setdefault(n, uf)
            out = uf
        elif isinstance(out, Mul):
            ks = [a for a in out.args if isinstance(a, Const)]
            rest = [a for a in out.args if not isinstance(a, Const)]
            if len(rest) == 2 and all(_is_leaf(a) for a in rest):
                out = fold(Mul(tuple(ks) + (fmul(*rest),)))
            elif len(rest) >= 2:
                raise TranslinError("product is not flattened")
        memo[n] = out
        return out

    return go(f)


def initial_abstraction(p: Problem):
    """Return ``(phi_hat, ctx)`` for a rewritten and flattened problem."""
    p = normalize(p)
    ctx = AbstractionContext(declarations=dict(p.declarations))
    core = _abstract(p.assertion, ctx)
    ctx.core = core
    for n in walk(core):
        if isinstance(n, UF):
            bucket = {"fexp": ctx.fexp, "fsin": ctx.fsin, "fmul": ctx.fmul}[n.fn]
            if n not in bucket:
                bucket.append(n)
        elif isinstance(n, PiSymbol):
            ctx.uses_pi = True
    base_parts = []
    for app in list(ctx.fsin):
        x = app.args[0]
        y = Var(base_name(x))
        ctx.base_var[app] = y
        base = fsin(y)
        ctx.base_var[base] = y
        ctx.base_apps.append(base)
        base_parts.append(conj(
            le(Neg(PI), y), le(y, PI),
            Implies(conj(le(Neg(PI), x), le(x, PI)), eq(y, x)),
            eq(app, base),
        ))
    for b in ctx.base_apps:
        if b not in ctx.fsin:
            ctx.fsin.append(b)
    if ctx.fsin:
        ctx.uses_pi = True
    parts = [core]
    if ctx.uses_pi:
        parts.append(_pi_constraint(*ctx.pi_bounds))
    parts.extend(base_parts)
    parts.extend(initial_axioms(ctx))
    return conj(*parts), ctx


def _exp_axioms(app: UF) -> list:
    x = app.args[0]
    one = ONE
    return [
        gt(app, ZERO),
        conj(Iff(eq(x, ZERO), eq(app, one)),
             Iff(lt(x, ZERO), lt(app, one)),
             Iff(gt(x, ZERO), gt(app, one))),
        disj(eq(x, ZERO), gt(app, add1(x))),
    ]


def add1(x):
    return fold(Add((x, ONE)))


def _pi_times(k):
    return scale(Fraction(k), PI)


def _sin_base_axioms(app: UF) -> list:
    y = app.args[0]
    neg_y = fold(Neg(y))
    s = app
    half, sixth, five6 = Fraction(1, 2), Fraction(1, 6), Fraction(5, 6)
    return [
        # Symmetry
        eq(s, fold(Neg(fsin(neg_y)))),
        # Phase
        conj(Iff(conj(lt(ZERO, y), lt(y, PI)), gt(s, ZERO)),
             Iff(conj(lt(Neg(PI), y), lt(y, ZERO)), lt(s, ZERO))),
        # Zero tangent
        conj(Implies(gt(y, ZERO), lt(s, y)), Implies(lt(y, ZERO), gt(s, y))),
        # Pi tangent
        conj(Implies(lt(y, PI), lt(s, sub(PI, y))),
             Implies(gt(y, Neg(PI)), gt(s, fold(Add((neg_y, Neg(PI))))))),
        # Significant values
        conj(Iff(eq(s, ZERO), disj(eq(y, ZERO), eq(y, PI), eq(y, Neg(PI)))),
             Iff(eq(s, ONE), eq(y, _pi_times(half))),
             Iff(eq(s, Const(Fraction(-1))), eq(y, _pi_times(-half))),
             Iff(eq(s, Const(half)), disj(eq(y, _pi_times(sixth)), eq(y, _pi_times(five6)))),
             Iff(eq(s, Const(-half)), disj(eq(y, _pi_times(-sixth)), eq(y, _pi_times(-five6))))),
    ]


def _fmul_axioms(app: UF) -> list:
    a, b = app.args
    out = [
        Iff(eq(app, ZERO), disj(eq(a, ZERO), eq(b, ZERO))),
        Iff(gt(app, ZERO), disj(conj(gt(a, ZERO), gt(b, ZERO)), conj(lt(a, ZERO), lt(b, ZERO)))),
        Iff(lt(app, ZERO), disj(conj(gt(a, ZERO), lt(b, ZERO)), conj(lt(a, ZERO), gt(b, ZERO)))),
        Implies(eq(b, ONE), eq(app, a)),
        Implies(eq(a, ONE), eq(app, b)),
        Implies(eq(b, Const(Fraction(-1))), eq(app, fold(Neg(a)))),
        Implies(eq(a, Const(Fraction(-1))), eq(app, fold(Neg(b)))),
    ]
    return list(dict.fromkeys(out))


def initial_axioms(ctx: AbstractionContext) -> list:
    """Initial axiom instances for every abstracted application, in a fixed order."""
    out = []
    for app in ctx.fexp:
        out.extend(_exp_axioms(app))
    for app in ctx.fsin:
        out.append(conj(le(Const(Fraction(-1)), app), le(app, ONE)))
    for app in ctx.base_apps:
        out.extend(_sin_base_axioms(app))
    for app in ctx.fmul:
        out.extend(_fmul_axioms(app))
    return out


def refine_pi(ctx: AbstractionContext) -> Formula:
    """Advance to the next bracket of pi and return its constraint."""
    if ctx.pi_index + 1 >= len(PI_TABLE):
        raise TableExhausted("pi bracket table exhausted")
    ctx.pi_index += 1
    return _pi_constraint(*ctx.pi_bounds)
