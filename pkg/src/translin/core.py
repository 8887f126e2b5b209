"""Exact rationals, terms, formulas, models and the SMT-LIB2 printer.

Everything numeric here is a :class:`fractions.Fraction`; no floats are used
anywhere in the solver core.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Mapping, Optional, Union

Rational = Fraction

RELATIONS = ("<", "<=", "=", ">=", ">")


class TranslinError(Exception):
    """Base class for all errors raised by this package."""


class UnassignedSymbol(TranslinError):
    pass


class EvaluationError(TranslinError):
    pass


# ---------------------------------------------------------------------------
# Terms


class Term:
    __slots__ = ()

    def __str__(self) -> str:
        return to_smtlib(self)


@dataclass(frozen=True)
class Var(Term):
    name: str


@dataclass(frozen=True)
class Const(Term):
    value: Fraction


@dataclass(frozen=True)
class PiSymbol(Term):
    """The symbolic stand-in for pi, bracketed by rational bounds."""


@dataclass(frozen=True)
class Add(Term):
    args: tuple


@dataclass(frozen=True)
class Neg(Term):
    arg: Term


@dataclass(frozen=True)
class Mul(Term):
    args: tuple


@dataclass(frozen=True)
class App(Term):
    """A transcendental function application, before abstraction."""

    fn: str
    arg: Term


@dataclass(frozen=True)
class UF(Term):
    """An uninterpreted application: fexp/fsin (unary) or fmul (binary)."""

    fn: str
    args: tuple


PI = PiSymbol()
PI_NAME = "pi!hat"
ZERO = Const(Fraction(0))
ONE = Const(Fraction(1))

TRANSCENDENTAL = ("exp", "sin", "cos", "tan", "log", "asin", "acos", "atan")
UF_OF = {"exp": "fexp", "sin": "fsin"}
TF_OF = {"fexp": "exp", "fsin": "sin"}


# ---------------------------------------------------------------------------
# Formulas


class Formula:
    __slots__ = ()

    def __str__(self) -> str:
        return to_smtlib(self)


@dataclass(frozen=True)
class Atom(Formula):
    rel: str
    lhs: Term
    rhs: Term


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula


@dataclass(frozen=True)
class And(Formula):
    args: tuple


@dataclass(frozen=True)
class Or(Formula):
    args: tuple


@dataclass(frozen=True)
class Implies(Formula):
    lhs: Formula
    rhs: Formula


@dataclass(frozen=True)
class Iff(Formula):
    lhs: Formula
    rhs: Formula


@dataclass(frozen=True)
class BoolVar(Formula):
    name: str


@dataclass(frozen=True)
class BoolConst(Formula):
    value: bool


TRUE = BoolConst(True)
FALSE = BoolConst(False)

Node = Union[Term, Formula]
Model = Mapping  # Term/BoolVar key -> Fraction or bool


# ---------------------------------------------------------------------------
# Interval record


@dataclass(frozen=True)
class Interval:
    """An interval with rational or infinite (``None``) endpoints."""

    lo: Optional[Fraction] = None
    hi: Optional[Fraction] = None
    lo_open: bool = False
    hi_open: bool = False

    def __post_init__(self):
        if self.lo is not None and self.hi is not None:
            if self.lo > self.hi:
                raise ValueError(f"empty interval [{self.lo}, {self.hi}]")
            if self.lo == self.hi and (self.lo_open or self.hi_open):
                raise ValueError("a width-0 interval must be closed")

    @classmethod
    def point(cls, c) -> "Interval":
        c = Fraction(c)
        return cls(c, c)

    @property
    def is_point(self) -> bool:
        return self.lo is not None and self.lo == self.hi

    def __contains__(self, x) -> bool:
        if self.lo is not None and (x < self.lo or (self.lo_open and x == self.lo)):
            return False
        if self.hi is not None and (x > self.hi or (self.hi_open and x == self.hi)):
            return False
        return True

    def intersect(self, other: "Interval") -> Optional["Interval"]:
        lo, lo_open = self.lo, self.lo_open
        if other.lo is not None and (lo is None or other.lo > lo
                                     or (other.lo == lo and other.lo_open)):
            lo, lo_open = other.lo, other.lo_open
        hi, hi_open = self.hi, self.hi_open
        if other.hi is not None and (hi is None or other.hi < hi
                                     or (other.hi == hi and other.hi_open)):
            hi, hi_open = other.hi, other.hi_open
        if lo is not None and hi is not None:
            if lo > hi or (lo == hi and (lo_open or hi_open)):
                return None
        return Interval(lo, hi, lo_open, hi_open)


FULL_LINE = Interval()


# ---------------------------------------------------------------------------
# Construction helpers


def const(q) -> Const:
    return Const(Fraction(q))


def var(name: str) -> Var:
    return Var(name)


def add(*args: Term) -> Term:
    return fold(Add(tuple(args)))


def sub(a: Term, b: Term) -> Term:
    return fold(Add((a, Neg(b))))


def scale(k, t: Term) -> Term:
    return fold(Mul((Const(Fraction(k)), t)))


def lt(a, b) -> Atom:
    return Atom("<", a, b)


def le(a, b) -> Atom:
    return Atom("<=", a, b)


def eq(a, b) -> Atom:
    return Atom("=", a, b)


def ge(a, b) -> Atom:
    return Atom(">=", a, b)


def gt(a, b) -> Atom:
    return Atom(">", a, b)


def conj(*fs: Formula) -> Formula:
    out = []
    for f in fs:
        if isinstance(f, And):
            out.extend(f.args)
        elif f == TRUE:
            continue
        elif f == FALSE:
            return FALSE
        else:
            out.append(f)
    if not out:
        return TRUE
    return out[0] if len(out) == 1 else And(tuple(out))


def disj(*fs: Formula) -> Formula:
    out = []
    for f in fs:
        if isinstance(f, Or):
            out.extend(f.args)
        elif f == FALSE:
            continue
        elif f == TRUE:
            return TRUE
        else:
            out.append(f)
    if not out:
        return FALSE
    return out[0] if len(out) == 1 else Or(tuple(out))


def conjuncts(f: Formula) -> list:
    if isinstance(f, And):
        out = []
        for g in f.args:
            out.extend(conjuncts(g))
        return out
    if f == TRUE:
        return []
    return [f]


def fold(t: Term) -> Term:
    """Fold constant subterms of a single node (children assumed folded)."""
    if isinstance(t, Neg):
        if isinstance(t.arg, Const):
            return Const(-t.arg.value)
        if isinstance(t.arg, Neg):
            return t.arg.arg
        return t
    if isinstance(t, Add):
        total = Fraction(0)
        rest = []
        todo = list(reversed(t.args))
        while todo:
            a = todo.pop()
            if isinstance(a, Const):
                total += a.value
            elif isinstance(a, Add):
                todo.extend(reversed(a.args))
            else:
                rest.append(a)
        if total != 0 or not rest:
            rest.append(Const(total))
        return rest[0] if len(rest) == 1 else Add(tuple(rest))
    if isinstance(t, Mul):
        k = Fraction(1)
        rest = []
        for a in t.args:
            if isinstance(a, Const):
                k *= a.value
            elif isinstance(a, Mul):
                for b in a.args:
                    if isinstance(b, Const):
                        k *= b.value
                    else:
                        rest.append(b)
            else:
                rest.append(a)
        if k == 0:
            return ZERO
        if not rest:
            return Const(k)
        if k != 1:
            rest.insert(0, Const(k))
        return rest[0] if len(rest) == 1 else Mul(tuple(rest))
    if isinstance(t, UF) and t.fn == "fmul":
        a, b = t.args
        if isinstance(a, Const) and isinstance(b, Const):
            return Const(a.value * b.value)
        if isinstance(a, Const) or isinstance(b, Const):
            return fold(Mul((a, b)))
    return t


# ---------------------------------------------------------------------------
# Traversal


def children(n: Node) -> tuple:
    if isinstance(n, (Add, Mul, And, Or)):
        return n.args
    if isinstance(n, UF):
        return n.args
    if isinstance(n, (Neg, Not)):
        return (n.arg,)
    if isinstance(n, App):
        return (n.arg,)
    if isinstance(n, Atom):
        return (n.lhs, n.rhs)
    if isinstance(n, (Implies, Iff)):
        return (n.lhs, n.rhs)
    return ()


def rebuild(n: Node, kids: tuple) -> Node:
    if isinstance(n, Add):
        return Add(kids)
    if isinstance(n, Mul):
        return Mul(kids)
    if isinstance(n, And):
        return And(kids)
    if isinstance(n, Or):
        return Or(kids)
    if isinstance(n, UF):
        return UF(n.fn, kids)
    if isinstance(n, Neg):
        return Neg(kids[0])
    if isinstance(n, Not):
        return Not(kids[0])
    if isinstance(n, App):
        return App(n.fn, kids[0])
    if isinstance(n, Atom):
        return Atom(n.rel, kids[0], kids[1])
    if isinstance(n, Implies):
        return Implies(kids[0], kids[1])
    if isinstance(n, Iff):
        return Iff(kids[0], kids[1])
    return n


def walk(n: Node) -> Iterator[Node]:
    """Pre-order traversal."""
    stack = [n]
    while stack:
        m = stack.pop()
        yield m
        stack.extend(reversed(children(m)))


def free_symbols(n: Node) -> list:
    """Variables, Boolean variables, pi and uf-applications, first-seen order."""
    seen = {}
    for m in walk(n):
        if isinstance(m, (Var, BoolVar, PiSymbol, UF)):
            seen.setdefault(m, None)
    return list(seen)


def substitute(f: Node, sigma: Mapping) -> Node:
    """Simultaneous substitution of symbols or uf-applications.

    Keys may be variables, Boolean variables, pi or uf-application
    occurrences. Constant subterms created by the substitution are folded.
    """
    memo = {}

    def go(n):
        if n in sigma:
            return sigma[n]
        hit = memo.get(n)
        if hit is not None:
            return hit
        kids = children(n)
        if not kids:
            out = n
        else:
            new = tuple(go(k) for k in kids)
            out = n if new == kids else rebuild(n, new)
            if isinstance(out, Term):
                out = fold(out)
        memo[n] = out
        return out

    return go(f)


# ---------------------------------------------------------------------------
# Evaluation


def evaluate(n: Node, m: Model):
    """Exact value of a term (Fraction) or formula (bool) under model ``m``."""
    if isinstance(n, Const):
        return n.value
    if isinstance(n, (Var, PiSymbol, UF, BoolVar)):
        if n in m:
            return m[n]
        raise UnassignedSymbol(f"no value for {to_smtlib(n)}")
    if isinstance(n, Add):
        return sum((evaluate(a, m) for a in n.args), Fraction(0))
    if isinstance(n, Neg):
        return -evaluate(n.arg, m)
    if isinstance(n, Mul):
        out = Fraction(1)
        for a in n.args:
            out *= evaluate(a, m)
        return out
    if isinstance(n, App):
        raise EvaluationError(f"unabstracted transcendental application {to_smtlib(n)}")
    if isinstance(n, BoolConst):
        return n.value
    if isinstance(n, Atom):
        a, b = evaluate(n.lhs, m), evaluate(n.rhs, m)
        return _compare(n.rel, a, b)
    if isinstance(n, Not):
        return not evaluate(n.arg, m)
    if isinstance(n, And):
        return all(evaluate(a, m) for a in n.args)
    if isinstance(n, Or):
        return any(evaluate(a, m) for a in n.args)
    if isinstance(n, Implies):
        return (not evaluate(n.lhs, m)) or evaluate(n.rhs, m)
    if isinstance(n, Iff):
        return evaluate(n.lhs, m) == evaluate(n.rhs, m)
    raise EvaluationError(f"cannot evaluate {n!r}")


def _compare(rel: str, a, b) -> bool:
    if rel == "<":
        return a < b
    if rel == "<=":
        return a <= b
    if rel == "=":
        return a == b
    if rel == ">=":
        return a >= b
    if rel == ">":
        return a > b
    raise EvaluationError(f"unknown relation {rel}")


# ---------------------------------------------------------------------------
# Continued fractions


def cf_approx(q, max_denominator: int) -> Fraction:
    """Best rational approximation of ``q`` with denominator <= ``max_denominator``.

    Walks the continued-fraction convergents of ``q``; the answer is either the
    last convergent that fits or the best admissible semiconvergent after it.
    """
    q = Fraction(q)
    if max_denominator < 1:
        raise ValueError("max_denominator must be >= 1")
    if q.denominator <= max_denominator:
        return q
    p0, q0, p1, q1 = 0, 1, 1, 0
    n, d = q.numerator, q.denominator
    while True:
        a = n // d
        q2 = q0 + a * q1
        if q2 > max_denominator:
            break
        p0, q0, p1, q1 = p1, q1, p0 + a * p1, q2
        n, d = d, n - a * d
    k = (max_denominator - q0) // q1
    semi = Fraction(p0 + k * p1, q0 + k * q1)
    conv = Fraction(p1, q1)
    return conv if abs(conv - q) <= abs(semi - q) else semi


# ---------------------------------------------------------------------------
# SMT-LIB2 printing

_SIMPLE_SYMBOL = re.compile(r"^[A-Za-z~!@$%^&*_\-+=<>.?/][A-Za-z0-9~!@$%^&*_\-+=<>.?/]*$")


def symbol(name: str) -> str:
    if _SIMPLE_SYMBOL.match(name):
        return name
    return "|" + name + "|"


def rational_smtlib(q: Fraction) -> str:
    q = Fraction(q)
    mag = abs(q)
    if mag.denominator == 1:
        s = f"{mag.numerator}.0"
    else:
        s = f"(/ {mag.numerator}.0 {mag.denominator}.0)"
    return f"(- {s})" if q < 0 else s


_CONNECTIVE = {And: "and", Or: "or"}


def to_smtlib(n: Node, pi_name: str = PI_NAME) -> str:
    """Render a term or formula as an SMT-LIB2 s-expression."""
    parts: list = []
    _emit(n, parts, pi_name)
    return "".join(parts)


def _emit(n: Node, out: list, pi_name: str) -> None:
    if isinstance(n, Var):
        out.append(symbol(n.name))
    elif isinstance(n, Const):
        out.append(rational_smtlib(n.value))
    elif isinstance(n, PiSymbol):
        out.append(pi_name)
    elif isinstance(n, BoolVar):
        out.append(symbol(n.name))
    elif isinstance(n, BoolConst):
        out.append("true" if n.value else "false")
    else:
        if isinstance(n, Add):
            head = "+"
        elif isinstance(n, Mul):
            head = "*"
        elif isinstance(n, Neg):
            head = "-"
        elif isinstance(n, App):
            head = n.fn
        elif isinstance(n, UF):
            head = n.fn
        elif isinstance(n, Atom):
            head = n.rel
        elif isinstance(n, Not):
            head = "not"
        elif isinstance(n, (And, Or)):
            head = _CONNECTIVE[type(n)]
        elif isinstance(n, Implies):
            head = "=>"
        elif isinstance(n, Iff):
            head = "="
        else:
            raise TypeError(f"cannot print {n!r}")
        out.append("(")
        out.append(head)
        for k in children(n):
            out.append(" ")
            _emit(k, out, pi_name)
        out.append(")")
