"""Command-line entry point: ``translin FILE [options]``."""

from __future__ import annotations

import argparse
import sys

from .backend import BackendConfig, ScriptedIO
from .core import TranslinError, rational_smtlib, to_smtlib
from .driver import SolverConfig, solve
from .frontend import parse

EXIT_OK, EXIT_ERROR, EXIT_UNKNOWN = 0, 1, 2


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="translin", description="SMT solver for real arithmetic with exp and sin.")
    ap.add_argument("input", help="SMT-LIB2 file in the supported subset")
    ap.add_argument("--backend", help="solver command (e.g. 'z3 -in'), or 'inprocess' for the bundled z3 engine")
    ap.add_argument("--mock", metavar="SCRIPT", help="JSON script of outcomes for the scripted mock backend")
    ap.add_argument("--timeout", type=float, default=60.0, help="wall-clock budget in seconds")
    ap.add_argument("--max-iters", type=int, default=200)
    ap.add_argument("--precision", type=int, default=2)
    ap.add_argument("--bump-period", type=int, default=4)
    ap.add_argument("--dump-lemmas", metavar="PATH", help="write the lemma trace, one formula per line")
    ap.add_argument("--stats", action="store_true", help="print key=value statistics to stderr")
    return ap


def _fmt(q) -> str:
    return rational_smtlib(q)


def main(argv=None) -> int:
    ap = _parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return EXIT_ERROR if e.code else EXIT_OK
    if not args.backend and not args.mock:
        print("error: --backend COMMAND (or 'inprocess') or --mock SCRIPT is required", file=sys.stderr)
        return EXIT_ERROR
    try:
        with open(args.input, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    try:
        problem = parse(text, args.input)
        mock = ScriptedIO.from_file(args.mock) if args.mock else None
        command = None if args.backend in (None, "inprocess") else args.backend
        backend = BackendConfig(command=command, timeout=args.timeout)
        cfg = SolverConfig(precision=args.precision, bump_period=args.bump_period,
                           max_iters=args.max_iters, time_budget=args.timeout,
                           backend=backend, mock=mock)
    except (TranslinError, ValueError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR
    result = solve(problem, cfg)
    print(result.status)
    if result.status == "sat" and problem.metadata.get("get_model"):
        print("(")
        for name in problem.reals():
            if name in result.model:
                print(f"  (define-fun {name} () Real {_fmt(result.model[name])})")
        for (fn, c), (lo, hi) in sorted(result.enclosures.items()):
            print(f"  ; {fn}({_fmt(c)}) in [{_fmt(lo)}, {_fmt(hi)}]")
        print(")")
    if args.dump_lemmas:
        try:
            with open(args.dump_lemmas, "w", encoding="utf-8") as fh:
                for lemma in result.lemmas:
                    fh.write(to_smtlib(lemma.formula) + "\n")
        except OSError as e:
            print(f"error: {e}", file=sys.stderr)
            return EXIT_ERROR
    if args.stats:
        stats = dict(result.stats)
        stats["status"] = result.status
        if result.reason:
            stats["reason"] = result.reason
        for k, v in stats.items():
            print(f"{k}={v}", file=sys.stderr)
    return EXIT_UNKNOWN if result.status == "unknown" else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
