from fractions import Fraction as F

from translin.abstraction import fexp, initial_abstraction
from translin.backend import open_session
from translin.bounds import poly_approx
from translin.core import (
    Not, PI, Var, conjuncts, const, evaluate, gt, le, to_smtlib, walk,
)
from translin.frontend import parse
from translin.satcheck import (
    build_universal_check, check_model, ct_variable, exact_lift, universal_bounds,
)

import harness

x, y = Var("x"), Var("y")


def _setup(text):
    p = parse(text)
    _, ctx = initial_abstraction(p)
    return p, ctx


def test_fast_path():
    p, ctx = _setup("(declare-fun x () Real)(assert (and (= x 0) (= (exp x) 1)))")
    mu = {x: F(0), fexp(x): F(1)}
    assert exact_lift(ctx.core, mu, ctx)
    assert check_model(p, mu, 2, ctx, None)


def test_no_fast_path_off_zero():
    p, ctx = _setup("(declare-fun x () Real)(assert (> (exp x) 1))")
    assert not exact_lift(ctx.core, {x: F(1), fexp(x): F(3)}, ctx)
    assert not check_model(p, {x: F(1), fexp(x): F(3)}, 2, ctx, None)


def test_window_certificate():
    text = "(declare-fun y () Real)(assert (= y (exp 1)))(assert (<= 2.7 y 2.8))"
    p, ctx = _setup(text)
    assert (poly_approx("exp", 1, F(1, 10)).lo, poly_approx("exp", 1, F(1, 10)).hi) == \
        (F(65, 24), F(325, 119))
    assert F(27, 10) <= F(65, 24) and F(325, 119) <= F(14, 5)
    a = Var("arg!0")
    mu = {a: F(1), y: F(27, 10), fexp(a): F(27, 10)}
    session = open_session()
    try:
        assert check_model(p, mu, 1, ctx, session)
        assert session.fresh_frame(gt(const(1), const(2))).status == "unsat"
    finally:
        session.close()
    # the oracle agrees: e is inside [2.7, 2.8]
    assert harness.certificate_holds(p, {"y": F(27, 10), "arg!0": F(1)})


def test_equality_never_certified():
    p, ctx = _setup("(declare-fun y () Real)(assert (= y (exp 1)))(assert (= y 2.7))")
    a = Var("arg!0")
    mu = {a: F(1), y: F(27, 10), fexp(a): F(27, 10)}
    session = open_session()
    try:
        for prec in range(1, 8):
            assert not check_model(p, mu, prec, ctx, session)
    finally:
        session.close()


def test_build_shape_and_determinism():
    p, ctx = _setup("(declare-fun x () Real)(assert (and (= x 1) (> (exp x) 2)))")
    mu = {x: F(1), fexp(x): F(3)}
    b = universal_bounds(ctx.core, mu, 2, ctx)
    f1 = build_universal_check(ctx.core, mu, b, ctx)
    f2 = build_universal_check(ctx.core, mu, dict(b), ctx)
    assert to_smtlib(f1) == to_smtlib(f2)
    y1 = ct_variable("exp", F(1))
    assert y1.name == "y!exp!1"
    parts = conjuncts(f1)
    lb, ub = b[fexp(x)]
    assert parts[:2] == [le(const(lb), y1), le(y1, const(ub))]
    assert isinstance(parts[-1], Not)
    assert PI not in set(walk(f1))


def test_shared_center_shares_variable():
    text = ("(declare-fun x () Real)(declare-fun z () Real)"
            "(assert (and (= x 1) (= z 1) (> (+ (exp x) (exp z)) 5)))")
    p, ctx = _setup(text)
    z = Var("z")
    mu = {x: F(1), z: F(1), fexp(x): F(3), fexp(z): F(3)}
    f = build_universal_check(ctx.core, mu, universal_bounds(ctx.core, mu, 2, ctx), ctx)
    names = {n.name for n in walk(f) if isinstance(n, Var) and n.name.startswith("y!exp")}
    assert names == {"y!exp!1"}


def test_ground_check_without_applications():
    p, ctx = _setup("(declare-fun x () Real)(assert (> x 1))")
    f = build_universal_check(ctx.core, {x: F(2)}, {}, ctx)
    assert evaluate(f, {}) is False
    assert exact_lift(ctx.core, {x: F(2)}, ctx)
