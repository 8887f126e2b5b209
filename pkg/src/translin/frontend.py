"""SMT-LIB2 subset reader/printer, transcendental rewriting and flattening.

Accepted grammar (anything else is rejected with an error):

* commands: ``set-logic``, ``set-info``, ``set-option``, ``declare-fun`` and
  ``declare-const`` of 0-ary ``Real``/``Bool`` symbols, ``assert``,
  ``check-sat``, ``get-model``, ``exit``;
* terms: numerals, decimals, ``+ - * /`` (divisors must be constant),
  ``exp sin cos tan log asin acos atan`` (``arcsin``/``arccos``/``arctan``
  are aliases), ``pow``/``^`` with a non-negative integer exponent, and
  ``pi``/``real.pi`` for the symbolic pi;
* formulas: ``< <= = >= >`` (chainable), ``distinct``, ``and or not => xor``,
  ``true false``, ``let`` (inlined).

User symbols may not contain ``!``; that character is reserved for names the
solver introduces.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction

from .core import (
    FALSE, PI, PI_NAME, TRANSCENDENTAL, TRUE, Add, And, App, Atom,
    BoolVar, Const, Formula, Iff, Implies, Mul, Neg, Not, Or, PiSymbol, Term,
    TranslinError, UF, Var, children, conj, disj, eq, fold, gt, le, lt, rebuild,
    scale, symbol, to_smtlib, walk,
)
from .sexpr import ParseError, SList, Tok, position, read_all


class SortError(TranslinError):
    pass


class UnsupportedConstruct(TranslinError):
    pass


@dataclass(frozen=True)
class Problem:
    declarations: dict  # name -> "Real" | "Bool", in declaration order
    assertion: Formula
    metadata: dict = field(default_factory=dict, compare=False)

    def reals(self) -> list:
        return [n for n, s in self.declarations.items() if s == "Real"]


_ALIASES = {"arcsin": "asin", "arccos": "acos", "arctan": "atan"}
_UNSUPPORTED = {
    "forall", "exists", "ite", "select", "store", "!", "define-fun",
    "define-fun-rec", "define-sort", "declare-sort", "push", "pop",
    "to_real", "to_int", "is_int", "div", "mod", "abs", "match",
}


def _err(cls, msg, node):
    line, col = position(node)
    where = f"{line}:{col}: " if line else ""
    return cls(f"{where}{msg}")


def _number(text: str):
    if text.isdigit():
        return Fraction(int(text))
    if text.count(".") == 1:
        a, b = text.split(".")
        if a.isdigit() and b.isdigit():
            return Fraction(text)
    return None


class _Reader:
    def __init__(self, declarations: dict, internal: bool = False):
        self.decls = declarations
        self.internal = internal

    # -- terms and formulas -------------------------------------------------

    def read(self, x, env):
        if isinstance(x, Tok):
            return self._atom(x, env)
        if not x:
            raise _err(ParseError, "empty application", x)
        head = x[0]
        if isinstance(head, SList):
            raise _err(UnsupportedConstruct, "indexed or higher-order application", x)
        op = head.text
        if head.quoted:
            raise _err(UnsupportedConstruct, f"application of |{op}|", x)
        if op in _UNSUPPORTED:
            raise _err(UnsupportedConstruct, f"'{op}' is outside the supported subset", x)
        args = x[1:]
        if op == "let":
            return self._let(x, env)
        if op in ("+", "-", "*", "/"):
            return self._arith(op, args, env, x)
        if op in ("<", "<=", "=", ">=", ">", "distinct"):
            return self._relation(op, args, env, x)
        if op in ("and", "or", "not", "=>", "xor"):
            return self._connective(op, args, env, x)
        fn = _ALIASES.get(op, op)
        if fn in TRANSCENDENTAL:
            if len(args) != 1:
                raise _err(SortError, f"{op} takes one argument", x)
            return App(fn, self.term(args[0], env))
        if op in ("pow", "^"):
            return self._pow(args, env, x)
        if self.internal and op in ("fexp", "fsin", "fmul"):
            want = 2 if op == "fmul" else 1
            if len(args) != want:
                raise _err(SortError, f"{op} takes {want} argument(s)", x)
            return UF(op, tuple(self.term(a, env) for a in args))
        raise _err(UnsupportedConstruct, f"unknown function '{op}'", x)

    def term(self, x, env) -> Term:
        t = self.read(x, env)
        if not isinstance(t, Term):
            raise _err(SortError, "expected a Real term, got a formula", x)
        return t

    def formula(self, x, env) -> Formula:
        f = self.read(x, env)
        if not isinstance(f, Formula):
            raise _err(SortError, "expected a formula, got a Real term", x)
        return f

    def _atom(self, tok: Tok, env):
        text = tok.text
        if tok.string:
            raise _err(SortError, "string literal in a term", tok)
        if not tok.quoted:
            q = _number(text)
            if q is not None:
                return Const(q)
            if text in ("true", "false"):
                return TRUE if text == "true" else FALSE
        if text in env:
            return env[text]
        sort = self.decls.get(text)
        if sort == "Real":
            return Var(text)
        if sort == "Bool":
            return BoolVar(text)
        if text in ("pi", "real.pi") or (self.internal and text == PI_NAME):
            return PI
        if self.internal and "!" in text:
            return Var(text)
        raise _err(SortError, f"undeclared symbol '{text}'", tok)

    def _let(self, x, env):
        if len(x) != 3 or not isinstance(x[1], SList):
            raise _err(ParseError, "malformed let", x)
        new = dict(env)
        for b in x[1]:
            if not isinstance(b, SList) or len(b) != 2 or not isinstance(b[0], Tok):
                raise _err(ParseError, "malformed let binding", b)
            new[b[0].text] = self.read(b[1], env)
        return self.read(x[2], new)

    def _arith(self, op, args, env, x):
        if not args:
            raise _err(ParseError, f"'{op}' needs arguments", x)
        ts = [self.term(a, env) for a in args]
        if op == "+":
            return ts[0] if len(ts) == 1 else Add(tuple(ts))
        if op == "-":
            if len(ts) == 1:
                t = ts[0]
                return Const(-t.value) if isinstance(t, Const) else Neg(t)
            return Add((ts[0],) + tuple(_negate(t) for t in ts[1:]))
        if op == "*":
            return ts[0] if len(ts) == 1 else Mul(tuple(ts))
        # division: every divisor must be constant
        num = ts[0]
        k = Fraction(1)
        for t, a in zip(ts[1:], args[1:]):
            d = _constant_value(t)
            if d is None:
                raise _err(UnsupportedConstruct, "non-constant divisor", a)
            if d == 0:
                raise _err(UnsupportedConstruct, "division by zero", a)
            k /= d
        if isinstance(num, Const):
            return Const(num.value * k)
        return Mul((Const(k), num))

    def _relation(self, op, args, env, x):
        if len(args) < 2:
            raise _err(ParseError, f"'{op}' needs at least two arguments", x)
        vals = [self.read(a, env) for a in args]
        if op == "=" and all(isinstance(v, Formula) for v in vals):
            return conj(*(Iff(a, b) for a, b in zip(vals, vals[1:])))
        for v, a in zip(vals, args):
            if not isinstance(v, Term):
                raise _err(SortError, f"'{op}' over mixed or Boolean arguments", a)
        if op == "distinct":
            return conj(*(Not(Atom("=", vals[i], vals[j]))
                          for i in range(len(vals)) for j in range(i + 1, len(vals))))
        return conj(*(Atom(op, a, b) for a, b in zip(vals, vals[1:])))

    def _connective(self, op, args, env, x):
        fs = [self.formula(a, env) for a in args]
        if op == "not":
            if len(fs) != 1:
                raise _err(ParseError, "'not' takes one argument", x)
            return Not(fs[0])
        if op == "and":
            return TRUE if not fs else (fs[0] if len(fs) == 1 else And(tuple(fs)))
        if op == "or":
            return FALSE if not fs else (fs[0] if len(fs) == 1 else Or(tuple(fs)))
        if len(fs) < 2:
            raise _err(ParseError, f"'{op}' needs at least two arguments", x)
        if op == "=>":
            out = fs[-1]
            for f in reversed(fs[:-1]):
                out = Implies(f, out)
            return out
        out = fs[0]
        for f in fs[1:]:
            out = Not(Iff(out, f))
        return out

    def _pow(self, args, env, x):
        if len(args) != 2:
            raise _err(ParseError, "pow takes two arguments", x)
        base = self.term(args[0], env)
        k = _constant_value(self.term(args[1], env))
        if k is None or k.denominator != 1 or k < 0:
            raise _err(UnsupportedConstruct, "pow needs a non-negative integer exponent", x)
        k = int(k)
        if k == 0:
            return Const(Fraction(1))
        if k == 1:
            return base
        return Mul(tuple([base] * k))


def _negate(t: Term) -> Term:
    return Const(-t.value) if isinstance(t, Const) else Neg(t)


def _constant_value(t: Term):
    if isinstance(t, Const):
        return t.value
    if isinstance(t, Neg):
        v = _constant_value(t.arg)
        return None if v is None else -v
    if isinstance(t, Add):
        vals = [_constant_value(a) for a in t.args]
        return None if None in vals else sum(vals, Fraction(0))
    if isinstance(t, Mul):
        out = Fraction(1)
        for a in t.args:
            v = _constant_value(a)
            if v is None:
                return None
            out *= v
        return out
    return None


def _check_symbol(tok, decls):
    if not isinstance(tok, Tok) or tok.string:
        raise _err(ParseError, "expected a symbol", tok)
    name = tok.text
    if "!" in name:
        raise _err(UnsupportedConstruct, f"symbol '{name}' uses the reserved character '!'", tok)
    if name in decls:
        raise _err(SortError, f"'{name}' declared twice", tok)
    return name


def parse(text: str, source: str = "<string>") -> Problem:
    """Parse an SMT-LIB2 script in the supported subset into a :class:`Problem`."""
    decls: dict = {}
    asserts = []
    meta = {"source": source, "options": {}, "get_model": False, "logic": None,
            "check_sat": False}
    reader = _Reader(decls)
    for cmd in read_all(text):
        if not isinstance(cmd, SList) or not cmd or not isinstance(cmd[0], Tok):
            raise _err(ParseError, "expected a command", cmd)
        name = cmd[0].text
        if name == "set-logic":
            meta["logic"] = cmd[1].text if len(cmd) > 1 else None
        elif name in ("set-info", "set-option"):
            if len(cmd) >= 2:
                meta["options"][cmd[1].text] = cmd[2].text if len(cmd) > 2 and isinstance(cmd[2], Tok) else None
        elif name == "declare-fun":
            if len(cmd) != 4 or not isinstance(cmd[2], SList):
                raise _err(ParseError, "malformed declare-fun", cmd)
            if cmd[2]:
                raise _err(UnsupportedConstruct, "only 0-ary function declarations are supported", cmd)
            decls[_check_symbol(cmd[1], decls)] = _sort(cmd[3])
        elif name == "declare-const":
            if len(cmd) != 3:
                raise _err(ParseError, "malformed declare-const", cmd)
            decls[_check_symbol(cmd[1], decls)] = _sort(cmd[2])
        elif name == "assert":
            if len(cmd) != 2:
                raise _err(ParseError, "assert takes one formula", cmd)
            asserts.append(reader.formula(cmd[1], {}))
        elif name == "check-sat":
            meta["check_sat"] = True
        elif name == "get-model":
            meta["get_model"] = True
        elif name == "exit":
            break
        else:
            raise _err(UnsupportedConstruct, f"command '{name}' is not supported", cmd)
    if not asserts:
        assertion = TRUE
    elif len(asserts) == 1:
        assertion = asserts[0]
    else:
        assertion = And(tuple(asserts))
    return Problem(decls, assertion, meta)


def _sort(tok):
    if not isinstance(tok, Tok) or tok.text not in ("Real", "Bool"):
        raise _err(UnsupportedConstruct, "only Real and Bool sorts are supported", tok)
    return tok.text


def parse_formula(text: str, declarations: dict | None = None) -> Formula:
    """Read one formula, e.g. a line of a lemma trace.

    Internal names (containing ``!``), pi and fexp/fsin/fmul applications are
    accepted here.
    """
    exprs = read_all(text)
    if len(exprs) != 1:
        raise ParseError("expected exactly one formula")
    return _Reader(dict(declarations or {}), internal=True).formula(exprs[0], {})


def print_problem(p: Problem) -> str:
    lines = []
    if p.metadata.get("logic"):
        lines.append(f"(set-logic {p.metadata['logic']})")
    for name, sort in p.declarations.items():
        lines.append(f"(declare-fun {symbol(name)} () {sort})")
    if p.assertion != TRUE:
        lines.append(f"(assert {to_smtlib(p.assertion, pi_name='real.pi')})")
    lines.append("(check-sat)")
    if p.metadata.get("get_model"):
        lines.append("(get-model)")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Rewriting and flattening


class _Fresh:
    def __init__(self, decls: dict):
        self.decls = dict(decls)
        self.counter = 0

    def __call__(self, stem: str) -> Var:
        while True:
            name = f"{stem}!{self.counter}"
            self.counter += 1
            if name not in self.decls:
                self.decls[name] = "Real"
                return Var(name)


def _half_pi() -> Term:
    return Mul((Const(Fraction(1, 2)), PI))


def rewrite_transcendental(p: Problem) -> Problem:
    """Rewrite cos/tan/log/asin/acos/atan into exp and sin.

    Relational rules introduce a fresh variable per distinct application and
    conjoin its defining constraints to the assertion.
    """
    fresh = _Fresh(p.declarations)
    side: list = []
    cache: dict = {}

    def cos_of(t):
        return App("sin", fold(Add((_half_pi(), fold(Neg(t))))))

    def tan_of(t):
        key = ("tan", t)
        if key not in cache:
            w = fresh("tan")
            c = cos_of(t)
            side.append(eq(App("sin", t), Mul((w, c))))
            side.append(disj(lt(c, Const(Fraction(0))), gt(c, Const(Fraction(0)))))
            cache[key] = w
        return cache[key]

    def asin_of(t):
        key = ("asin", t)
        if key not in cache:
            w = fresh("asin")
            side.append(eq(App("sin", w), t))
            side.append(le(scale(Fraction(-1, 2), PI), w))
            side.append(le(w, _half_pi()))
            cache[key] = w
        return cache[key]

    def go(n):
        kids = children(n)
        if kids:
            new = tuple(go(k) for k in kids)
            n = n if new == kids else rebuild(n, new)
        if not isinstance(n, App) or n.fn in ("exp", "sin"):
            return n
        t = n.arg
        if n.fn == "cos":
            return cos_of(t)
        if n.fn == "tan":
            return tan_of(t)
        if n.fn == "asin":
            return asin_of(t)
        if n.fn == "acos":
            return fold(Add((_half_pi(), Neg(asin_of(t)))))
        if n.fn == "log":
            key = ("log", t)
            if key not in cache:
                w = fresh("log")
                side.append(eq(App("exp", w), t))
                side.append(gt(t, Const(Fraction(0))))
                cache[key] = w
            return cache[key]
        if n.fn == "atan":
            key = ("atan", t)
            if key not in cache:
                w = fresh("atan")
                side.append(eq(tan_of(w), t))
                side.append(lt(scale(Fraction(-1, 2), PI), w))
                side.append(lt(w, _half_pi()))
                cache[key] = w
            return cache[key]
        raise UnsupportedConstruct(f"no rewrite rule for {n.fn}")

    body = go(p.assertion)
    decls = fresh.decls
    return replace(p, declarations=decls, assertion=conj(body, *side))


def _is_leaf(t: Term) -> bool:
    return isinstance(t, (Var, PiSymbol))


def flatten(p: Problem) -> Problem:
    """Give every transcendental application a variable argument.

    Non-linear products are flattened the same way: each product keeps at most
    two non-constant factors, and those factors are variables or pi.
    """
    fresh = _Fresh(p.declarations)
    defs: list = []
    cache: dict = {}

    def name_for(t: Term, stem: str) -> Var:
        if t not in cache:
            v = fresh(stem)
            cache[t] = v
            defs.append(eq(v, t))
        return cache[t]

    def go(n):
        kids = children(n)
        if kids:
            new = tuple(go(k) for k in kids)
            n = n if new == kids else rebuild(n, new)
        if isinstance(n, Term):
            n = fold(n)
        if isinstance(n, App) and not isinstance(n.arg, Var):
            return App(n.fn, name_for(n.arg, "arg"))
        if isinstance(n, Mul):
            k = [a for a in n.args if isinstance(a, Const)]
            rest = [a for a in n.args if not isinstance(a, Const)]
            if len(rest) < 2:
                return n
            rest = [a if _is_leaf(a) else name_for(a, "fac") for a in rest]
            while len(rest) > 2:
                rest = [name_for(Mul((rest[0], rest[1])), "prod")] + rest[2:]
            return Mul(tuple(k + rest))
        return n

    body = go(p.assertion)
    if not defs:
        return p
    return replace(p, declarations=fresh.decls, assertion=conj(body, *defs))


def normalize(p: Problem) -> Problem:
    return flatten(rewrite_transcendental(p))


def transcendental_apps(f) -> list:
    seen = {}
    for n in walk(f):
        if isinstance(n, App):
            seen.setdefault(n, None)
    return list(seen)
