"""The abstraction-refinement main loop."""

from __future__ import annotations

import time
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

from .abstraction import TableExhausted, initial_abstraction
from .backend import BackendConfig, BackendError, ScriptedIO, open_session
from .bounds import DegreeLimit, poly_approx
from .core import TF_OF, Var, conjuncts
from .frontend import Problem
from .refinement import SecantStore, check_refine, refine_extra

MAX_PRECISION = 60


@dataclass
class SolverConfig:
    precision: int = 2
    bump_period: int = 4
    max_iters: int = 200
    time_budget: float = 60.0  # seconds, wall clock
    backend: BackendConfig = field(default_factory=BackendConfig)
    mock: Optional[ScriptedIO] = None
    recursion_cap: int = 8
    # called as observer(mu, lemmas) with every batch of new lemmas
    observer: Optional[Callable] = None

    def __post_init__(self):
        if self.precision < 1:
            raise ValueError("initial precision must be at least 1")
        if self.bump_period < 1 or self.max_iters < 1 or self.time_budget <= 0:
            raise ValueError("budgets must be positive")


@dataclass
class SolverResult:
    status: str  # sat | unsat | unknown
    model: dict = field(default_factory=dict)  # variable name -> Fraction
    enclosures: dict = field(default_factory=dict)  # "exp(c)" -> (lo, hi)
    reason: Optional[str] = None
    stats: dict = field(default_factory=dict)
    lemmas: list = field(default_factory=list)
    diagnostics: str = ""
    witness: dict = field(default_factory=dict)  # every real symbol, internal ones too
    transcript: list = field(default_factory=list)
    outcomes: list = field(default_factory=list)


def maybe_increase_precision(iteration: int, precision: int, reached: int = 0,
                             period: int = 4) -> int:
    """Scheduled bump every ``period`` iterations, never below ``reached``."""
    scheduled = precision + 1 if iteration > 0 and iteration % period == 0 else precision
    return max(scheduled, reached)


def _enclosures(ctx, mu: dict, precision: int) -> dict:
    eps = Fraction(1, 10 ** precision)
    out = {}
    for app in ctx.fexp + ctx.fsin:
        fn = TF_OF[app.fn]
        c = mu[app.args[0]]
        if (fn, c) in out:
            continue
        pair = poly_approx(fn, c, eps)
        out[(fn, c)] = (pair.lo, pair.hi)
    return out


def solve(p: Problem, cfg: Optional[SolverConfig] = None) -> SolverResult:
    cfg = cfg or SolverConfig()
    start = time.monotonic()
    deadline = start + cfg.time_budget
    phi, ctx = initial_abstraction(p)
    store = SecantStore()
    gamma: dict = {}
    kinds: Counter = Counter()
    precision = cfg.precision
    iteration = 0
    session = None

    def finish(status, reason=None, model=None, enclosures=None, diagnostics="",
               witness=None):
        stats = {
            "iterations": iteration,
            "lemmas": len(gamma),
            "final_precision": precision,
            "time": round(time.monotonic() - start, 3),
        }
        for k in sorted(kinds):
            stats[f"lemmas_{k}"] = kinds[k]
        return SolverResult(status, model or {}, enclosures or {}, reason, stats,
                            list(gamma.values()), diagnostics, witness or {},
                            list(session.transcript) if session else [],
                            list(session.outcomes) if session else [])

    try:
        session = open_session(cfg.backend, cfg.mock)
    except BackendError as e:
        return finish("unknown", "backend-unknown", diagnostics=str(e))
    try:
        session.track(ctx.tracked())
        session.assert_lemmas(conjuncts(phi))
        while True:
            if iteration >= cfg.max_iters or time.monotonic() > deadline:
                return finish("unknown", "budget")
            iteration += 1
            outcome = session.check(deadline)
            if outcome.status == "unsat":
                return finish("unsat")
            if outcome.status != "sat":
                return finish("unknown", "backend-unknown", diagnostics=outcome.diagnostics)
            mu = outcome.model
            ref = check_refine(p, mu, precision, ctx, store, session,
                               cap=cfg.recursion_cap, deadline=deadline)
            if ref.sat:
                model = {v.name: mu[v] for v in ctx.tracked()
                         if isinstance(v, Var) and v.name in p.declarations}
                witness = {v.name: mu[v] for v in ctx.tracked() if isinstance(v, Var)}
                return finish("sat", model=model,
                              enclosures=_enclosures(ctx, mu, ref.precision),
                              witness=witness)
            precision = maybe_increase_precision(iteration, precision, ref.precision,
                                                 cfg.bump_period)
            new = list(ref.lemmas) + refine_extra(p, mu, ctx)
            if cfg.observer is not None:
                cfg.observer(mu, new)
            fresh = []
            for lemma in new:
                if lemma.formula not in gamma:
                    gamma[lemma.formula] = lemma
                    kinds[lemma.kind] += 1
                    fresh.append(lemma.formula)
            if precision > MAX_PRECISION:
                return finish("unknown", "precision-ceiling")
            if not fresh and "needs-precision" in ref.flags and precision >= MAX_PRECISION:
                return finish("unknown", "precision-ceiling")
            session.assert_lemmas(fresh)
    except TableExhausted:
        return finish("unknown", "precision-ceiling")
    except DegreeLimit as e:
        return finish("unknown", "precision-ceiling", diagnostics=str(e))
    except BackendError as e:
        return finish("unknown", "backend-unknown", diagnostics=str(e))
    finally:
        try:
            if session is not None:
                session.close()
        except BackendError:
            pass
