from fractions import Fraction

import pytest
from mpmath import mp, mpf

from translin.abstraction import (
    PI_TABLE, AbstractionContext, TableExhausted, fexp, fmul, fsin,
    initial_abstraction, initial_axioms, refine_pi,
)
from translin.core import (
    PI, App, Atom, Const, Iff, Mul, Var, conjuncts, const, eq, gt, lt, walk,
)
from translin.frontend import normalize, parse

import oracle

x = Var("x")


def _abs(text):
    return initial_abstraction(parse("(declare-fun x () Real)(declare-fun y () Real)" + text))


def test_exp_abstraction():
    phi, ctx = _abs("(assert (> (exp x) 1))")
    parts = conjuncts(phi)
    assert parts[0] == gt(fexp(x), const(1))
    assert ctx.fexp == [fexp(x)]
    assert not ctx.uses_pi
    assert gt(fexp(x), const(0)) in parts
    assert not any(isinstance(n, App) for n in walk(phi))


def test_sin_abstraction():
    phi, ctx = _abs("(assert (= (sin x) 0))")
    parts = conjuncts(phi)
    y = Var("y!x")
    assert parts[0] == eq(fsin(x), const(0))
    assert lt(Const(Fraction(333, 106)), PI) in parts
    assert lt(PI, Const(Fraction(355, 113))) in parts
    assert eq(fsin(x), fsin(y)) in parts
    assert ctx.base_var[fsin(x)] == y
    assert ctx.base_var[fsin(y)] == y
    assert ctx.base_apps == [fsin(y)]
    assert ctx.ext_apps == [fsin(x)]
    assert set(ctx.fsin) == {fsin(x), fsin(y)}


def test_product_abstraction():
    phi, ctx = _abs("(assert (< (* x x) 0))")
    assert conjuncts(phi)[0] == lt(fmul(x, x), const(0))
    assert ctx.fmul == [fmul(x, x)]
    assert fmul(Var("b"), Var("a")) == fmul(Var("a"), Var("b"))


def test_exp_axiom_instances():
    ctx = AbstractionContext(fexp=[fexp(x)])
    ax = initial_axioms(ctx)
    assert len(ax) == 3
    assert ax[0] == gt(fexp(x), const(0))
    assert "(= x 0.0)" in str(ax[2]) and "(> (fexp x) (+ x 1.0))" in str(ax[2])


def test_sin_significant_values():
    _, ctx = _abs("(assert (> (sin x) 0))")
    ax = initial_axioms(ctx)
    y = Var("y!x")
    want = Iff(eq(fsin(y), const(1)), eq(y, _half_pi()))
    assert any(want in conjuncts(a) for a in ax)


def _half_pi():
    return Mul((const(Fraction(1, 2)), PI))


def test_no_applications_no_axioms():
    _, ctx = _abs("(assert (> x y))")
    assert initial_axioms(ctx) == []


def test_axiom_count_is_linear():
    counts = []
    for k in (1, 2, 4, 8):
        decls = "".join(f"(declare-fun v{i} () Real)" for i in range(k))
        body = " ".join(f"(> (exp v{i}) (sin v{i}))" for i in range(k))
        _, ctx = initial_abstraction(parse(decls + f"(assert (and {body}))"))
        counts.append(len(initial_axioms(ctx)))
    per = counts[0]
    assert counts == [per * k for k in (1, 2, 4, 8)]


def test_pi_table_brackets_pi():
    with mp.workdps(60):
        pi = +mp.pi
        prev = None
        for lo, hi in PI_TABLE:
            assert mpf(lo.numerator) / lo.denominator < pi < mpf(hi.numerator) / hi.denominator
            if prev is not None:
                assert hi - lo < prev[1] - prev[0]
                assert prev[0] <= lo and hi <= prev[1]
            prev = (lo, hi)
    # independently via the interval oracle
    p_lo, p_hi = oracle.pi_enclosure()
    for lo, hi in PI_TABLE:
        assert lo < p_lo and p_hi < hi


def test_refine_pi():
    _, ctx = _abs("(assert (> (sin x) 0))")
    lemma = refine_pi(ctx)
    assert ctx.pi_bounds == (Fraction(103993, 33102), Fraction(104348, 33215))
    assert lt(Const(Fraction(103993, 33102)), PI) in conjuncts(lemma)
    while ctx.pi_index + 1 < len(PI_TABLE):
        refine_pi(ctx)
    with pytest.raises(TableExhausted):
        refine_pi(ctx)


def _base_rep(v):
    with oracle._precision():
        if isinstance(v, Fraction):
            v = oracle.rat(v)
        k = round(float(oracle.bounds_of(v)[0]) / 6.283185307179586)
        return v - 2 * k * (oracle.iv.pi + 0)


@pytest.mark.parametrize("text", [
    "(assert (and (> (sin x) 0) (< (exp x) 3)))",
    "(assert (or (< (sin (* 2 x)) (- 0.5)) (> (* x x y) 1)))",
    "(assert (>= (exp (- x y)) (+ 1 (sin y))))",
])
def test_safe_approximation(text):
    """Models of the input, extended with true values, never falsify the abstraction."""
    p = parse("(declare-fun x () Real)(declare-fun y () Real)" + text)
    phi, ctx = initial_abstraction(p)
    grid = [Fraction(k, 4) for k in range(-28, 29, 3)]
    q = normalize(p)
    defs = {f.lhs.name: f.rhs for f in conjuncts(q.assertion)
            if isinstance(f, Atom) and f.rel == "=" and isinstance(f.lhs, Var)
            and f.lhs.name not in p.declarations}
    hits = 0
    for a in grid:
        for b in grid:
            env = {"x": a, "y": b}
            if oracle.truth(p.assertion, env) is not True:
                continue
            hits += 1
            for name, t in defs.items():
                env[name] = oracle.term_value(t, env)
            for app, yv in ctx.base_var.items():
                if app.args[0] != yv:
                    v = env[app.args[0].name]
                    env[yv.name] = _base_rep(v)
            assert oracle.truth(phi, env) is not False, env
    assert hits > 0
