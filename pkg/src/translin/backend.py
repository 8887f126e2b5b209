"""SMT-LIB2 sessions over a pluggable transport.

The session layer serializes declarations, assertions and queries; the
transport only moves text. Three transports are provided: a child process
speaking SMT-LIB2 on stdin/stdout, z3's in-process string interface, and a
scripted mock for tests.
"""

from __future__ import annotations

import json
import os
import select
import shlex
import subprocess
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .core import (
    PI_NAME, BoolVar, PiSymbol, TranslinError, UF, Var, symbol, to_smtlib,
    walk,
)
from .sexpr import ParseError, SList, Tok, complete_prefix, read_all


class BackendError(TranslinError):
    pass


class ProtocolError(BackendError):
    """The solver sent something we could not interpret."""


class ProcessDied(BackendError):
    pass


class BackendTimeout(BackendError):
    pass


@dataclass
class BackendConfig:
    command: Optional[list] = None  # None selects the in-process engine
    timeout: float = 60.0  # seconds per check
    logic: str = "QF_UFLRA"
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.timeout <= 0:
            raise ValueError("timeout must be positive")
        if isinstance(self.command, str):
            self.command = shlex.split(self.command)


@dataclass
class SolveOutcome:
    status: str  # sat | unsat | unknown | error
    model: Optional[dict] = None
    diagnostics: str = ""


UF_SIGNATURES = {"fexp": 1, "fsin": 1, "fmul": 2}


# ---------------------------------------------------------------------------
# Value parsing


def parse_value(x) -> Fraction:
    """Read a rational in one of the forms n, n.m, (/ a b), (- a)."""
    if isinstance(x, Tok):
        try:
            return Fraction(x.text)
        except ValueError:
            raise ProtocolError(f"not a rational: {x.text!r}") from None
    if isinstance(x, SList) and x and isinstance(x[0], Tok):
        head = x[0].text
        if head == "-" and len(x) == 2:
            return -parse_value(x[1])
        if head == "/" and len(x) == 3:
            d = parse_value(x[2])
            if d == 0:
                raise ProtocolError("division by zero in model value")
            return parse_value(x[1]) / d
    raise ProtocolError(f"unsupported value expression {_show(x)}")


def _show(x) -> str:
    if isinstance(x, Tok):
        return x.text
    return "(" + " ".join(_show(y) for y in x) + ")"


def _check_error(expr) -> None:
    if isinstance(expr, SList) and expr and isinstance(expr[0], Tok) and expr[0].text == "error":
        msg = expr[1].text if len(expr) > 1 and isinstance(expr[1], Tok) else _show(expr)
        raise ProtocolError(f"solver error: {msg}")


# ---------------------------------------------------------------------------
# Transports


class ProcessIO:
    """A solver child process reading SMT-LIB2 from stdin."""

    def __init__(self, command: list):
        try:
            self.proc = subprocess.Popen(
                command, stdin=subprocess.PIPE, stdout=subprocess.PIPE,
                stderr=subprocess.DEVNULL, bufsize=0)
        except OSError as e:
            raise ProcessDied(f"cannot start {command[0]}: {e}") from e
        self.buf = b""

    def send(self, text: str) -> None:
        if self.proc.poll() is not None:
            raise ProcessDied("solver process has exited")
        try:
            self.proc.stdin.write(text.encode() + b"\n")
            self.proc.stdin.flush()
        except (BrokenPipeError, OSError) as e:
            raise ProcessDied(f"write failed: {e}") from e

    def _read_expr(self, deadline: Optional[float]) -> str:
        fd = self.proc.stdout.fileno()
        while True:
            text = self.buf.decode(errors="replace")
            n = complete_prefix(text)
            if n:
                self.buf = text[n:].encode()
                return text[:n]
            wait = None if deadline is None else deadline - time.monotonic()
            if wait is not None and wait <= 0:
                self.kill()
                raise BackendTimeout("solver timed out")
            ready, _, _ = select.select([fd], [], [], wait)
            if not ready:
                continue
            chunk = os.read(fd, 65536)
            if not chunk:
                raise ProcessDied("solver closed its output")
            self.buf += chunk

    def query(self, text: str, deadline: Optional[float] = None) -> str:
        self.send(text)
        return self._read_expr(deadline)

    def kill(self) -> None:
        if self.proc.poll() is None:
            self.proc.kill()
        self.proc.wait()

    def close(self) -> None:
        if self.proc.poll() is None:
            try:
                self.send("(exit)")
                self.proc.stdin.close()
                self.proc.wait(timeout=2)
            except (BackendError, OSError, subprocess.TimeoutExpired):
                self.kill()


class Z3InProcessIO:
    """z3's SMT-LIB2 string interface inside this process."""

    def __init__(self):
        import z3

        self._z3 = z3
        self.ctx = z3.Context()

    def _eval(self, text: str) -> str:
        try:
            return self._z3.Z3_eval_smtlib2_string(self.ctx.ref(), text)
        except self._z3.Z3Exception as e:
            raw = e.value if isinstance(e.value, str) else e.value.decode(errors="replace")
            raise ProtocolError(f"solver error: {raw.strip()}") from None

    def send(self, text: str) -> None:
        out = self._eval(text)
        for expr in read_all(out):
            _check_error(expr)

    def query(self, text: str, deadline: Optional[float] = None) -> str:
        if deadline is not None:
            ms = max(1, int((deadline - time.monotonic()) * 1000))
            self._eval(f"(set-option :timeout {ms})")
        return self._eval(text)

    def close(self) -> None:
        self.ctx = None


class ScriptedIO:
    """Replays scripted check-sat answers; records every command it sees.

    ``script`` is a list of outcomes, each a status string or a dict
    ``{"status": ..., "model": {symbol: value}}``. Unlisted symbols read as 0.
    Once the script runs out every check answers ``unknown``.
    """

    def __init__(self, script=()):
        self.script = [s if isinstance(s, dict) else {"status": s} for s in script]
        self.log: list = []
        self.pushes = 0
        self.pops = 0
        self.depth = 0
        self.current: dict = {}

    @classmethod
    def from_file(cls, path: str) -> "ScriptedIO":
        with open(path, encoding="utf-8") as fh:
            return cls(json.load(fh))

    def send(self, text: str) -> None:
        for expr in read_all(text):
            self._command(expr)

    def _command(self, expr):
        if not isinstance(expr, SList) or not expr or not isinstance(expr[0], Tok):
            raise ProtocolError(f"malformed command {_show(expr)}")
        self.log.append(_show(expr))
        head = expr[0].text
        if head == "push":
            self.pushes += 1
            self.depth += 1
        elif head == "pop":
            if self.depth == 0:
                raise ProtocolError("pop without push")
            self.pops += 1
            self.depth -= 1
        return head

    def query(self, text: str, deadline: Optional[float] = None) -> str:
        replies = []
        for expr in read_all(text):
            head = self._command(expr)
            if head == "check-sat":
                self.current = self.script.pop(0) if self.script else {"status": "unknown"}
                replies.append(self.current["status"])
            elif head == "get-value":
                model = self.current.get("model", {})
                pairs = []
                for t in expr[1]:
                    key = _show(t)
                    pairs.append(f"({key} {_value_text(model.get(key, 0))})")
                replies.append("(" + " ".join(pairs) + ")")
        return "\n".join(replies)

    def close(self) -> None:
        self.log.append("(exit)")


def _value_text(v) -> str:
    from .core import rational_smtlib

    return rational_smtlib(Fraction(v))


# ---------------------------------------------------------------------------
# Session


def _decl(n) -> Optional[str]:
    if isinstance(n, Var):
        return f"(declare-fun {symbol(n.name)} () Real)"
    if isinstance(n, PiSymbol):
        return f"(declare-fun {PI_NAME} () Real)"
    if isinstance(n, BoolVar):
        return f"(declare-fun {symbol(n.name)} () Bool)"
    return None


class SmtSession:
    """One incremental solver conversation.

    The main frame only ever grows; :meth:`fresh_frame` pushes a scope for a
    one-off query and pops it again.
    """

    def __init__(self, io, config: Optional[BackendConfig] = None):
        self.io = io
        self.config = config or BackendConfig()
        self.declared: set = set()
        self.frame_decls: list = []
        self.tracked: list = []
        self.transcript: list = []
        self.outcomes: list = []  # replayable by ScriptedIO
        self._send("(set-option :print-success false)")
        for k, v in self.config.options.items():
            self._send(f"(set-option :{k} {v})")
        self._send(f"(set-logic {self.config.logic})")

    def _send(self, text: str) -> None:
        self.transcript.append(text)
        self.io.send(text)

    def _query(self, text: str, deadline) -> str:
        self.transcript.append(text)
        return self.io.query(text, deadline)

    def _declare(self, f) -> None:
        for n in walk(f):
            key = n if not isinstance(n, UF) else ("uf", n.fn)
            if key in self.declared:
                continue
            if isinstance(n, UF):
                arity = UF_SIGNATURES[n.fn]
                text = f"(declare-fun {n.fn} ({' '.join(['Real'] * arity)}) Real)"
            else:
                text = _decl(n)
                if text is None:
                    continue
            self._send(text)
            self.declared.add(key)
            if self.frame_decls:
                self.frame_decls[-1].append(key)

    def track(self, symbols) -> None:
        for s in symbols:
            if s not in self.tracked:
                self.tracked.append(s)

    def assert_lemmas(self, fs) -> None:
        for f in fs:
            self._declare(f)
            self._send(f"(assert {to_smtlib(f)})")

    def _deadline(self, deadline: Optional[float]) -> float:
        own = time.monotonic() + self.config.timeout
        return own if deadline is None else min(own, deadline)

    def _check(self, deadline, want_model: bool) -> SolveOutcome:
        try:
            reply = self._query("(check-sat)", self._deadline(deadline))
        except BackendTimeout as e:
            return SolveOutcome("unknown", None, str(e))
        try:
            exprs = read_all(reply)
        except ParseError as e:
            raise ProtocolError(f"unreadable reply {reply!r}: {e}") from None
        if not exprs:
            raise ProtocolError("empty reply to check-sat")
        _check_error(exprs[0])
        status = exprs[0].text if isinstance(exprs[0], Tok) else None
        if status not in ("sat", "unsat", "unknown"):
            raise ProtocolError(f"unexpected check-sat reply {reply.strip()!r}")
        if status != "sat" or not want_model or not self.tracked:
            self.outcomes.append({"status": status})
            return SolveOutcome(status, None if status != "sat" else {}, "")
        model = self._values(self.tracked, deadline)
        self.outcomes.append({"status": status, "model": {
            to_smtlib(k): str(v) for k, v in model.items()}})
        return SolveOutcome("sat", model, "")

    def _values(self, symbols: list, deadline) -> dict:
        for s in symbols:
            self._declare(s)
        if not symbols:
            return {}
        text = "(get-value (" + " ".join(to_smtlib(s) for s in symbols) + "))"
        reply = self._query(text, self._deadline(deadline))
        exprs = read_all(reply)
        if len(exprs) != 1:
            raise ProtocolError(f"unexpected get-value reply {reply.strip()!r}")
        _check_error(exprs[0])
        pairs = exprs[0]
        if not isinstance(pairs, SList) or len(pairs) != len(symbols):
            raise ProtocolError("get-value reply does not match the request")
        model = {}
        for s, pair in zip(symbols, pairs):
            if not isinstance(pair, SList) or len(pair) != 2:
                raise ProtocolError(f"malformed get-value entry {_show(pair)}")
            model[s] = parse_value(pair[1])
        return model

    def check(self, deadline: Optional[float] = None) -> SolveOutcome:
        return self._check(deadline, True)

    def fresh_frame(self, f, deadline: Optional[float] = None) -> SolveOutcome:
        self._send("(push 1)")
        self.frame_decls.append([])
        try:
            self.assert_lemmas([f])
            return self._check(deadline, False)
        finally:
            for key in self.frame_decls.pop():
                self.declared.discard(key)
            self._send("(pop 1)")

    def close(self) -> None:
        self.transcript.append("(exit)")
        self.io.close()


def open_session(config: Optional[BackendConfig] = None, mock: Optional[ScriptedIO] = None) -> SmtSession:
    config = config or BackendConfig()
    if mock is not None:
        io = mock
    elif config.command:
        io = ProcessIO(config.command)
    else:
        io = Z3InProcessIO()
    return SmtSession(io, config)
