"""A small position-tracking s-expression reader shared by the parser and backend."""

from __future__ import annotations

from dataclasses import dataclass

from .core import TranslinError


class ParseError(TranslinError):
    """Malformed input; carries a 1-based line/column."""

    def __init__(self, msg: str, line: int = 0, col: int = 0):
        self.line, self.col = line, col
        where = f"{line}:{col}: " if line else ""
        super().__init__(f"{where}{msg}")


@dataclass(frozen=True)
class Tok:
    text: str
    line: int
    col: int
    quoted: bool = False  # |symbol| or "string"
    string: bool = False


class SList(list):
    """A parenthesised list that remembers where it opened."""

    line = 0
    col = 0


def tokenize(text: str):
    i, line, col = 0, 1, 1
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch.isspace():
            i += 1
            col += 1
            continue
        if ch == ";":
            while i < n and text[i] != "\n":
                i += 1
            continue
        if ch in "()":
            yield Tok(ch, line, col)
            i += 1
            col += 1
            continue
        if ch == "|":
            j = text.find("|", i + 1)
            if j < 0:
                raise ParseError("unterminated quoted symbol", line, col)
            body = text[i + 1:j]
            yield Tok(body, line, col, quoted=True)
            line += body.count("\n")
            col += j + 1 - i
            i = j + 1
            continue
        if ch == '"':
            j = i + 1
            while True:
                j = text.find('"', j)
                if j < 0:
                    raise ParseError("unterminated string literal", line, col)
                if j + 1 < n and text[j + 1] == '"':
                    j += 2
                    continue
                break
            body = text[i + 1:j]
            yield Tok(body, line, col, quoted=True, string=True)
            line += body.count("\n")
            col += j + 1 - i
            i = j + 1
            continue
        j = i
        while j < n and not text[j].isspace() and text[j] not in '();|"':
            j += 1
        yield Tok(text[i:j], line, col)
        col += j - i
        i = j


def read_all(text: str) -> list:
    """Parse every top-level s-expression in ``text``."""
    stack: list = []
    top: list = []
    for tok in tokenize(text):
        if tok.text == "(" and not tok.quoted:
            lst = SList()
            lst.line, lst.col = tok.line, tok.col
            stack.append(lst)
        elif tok.text == ")" and not tok.quoted:
            if not stack:
                raise ParseError("unexpected ')'", tok.line, tok.col)
            done = stack.pop()
            (stack[-1] if stack else top).append(done)
        else:
            (stack[-1] if stack else top).append(tok)
    if stack:
        raise ParseError("unbalanced '('", stack[-1].line, stack[-1].col)
    return top


def position(x) -> tuple:
    if isinstance(x, Tok):
        return x.line, x.col
    return getattr(x, "line", 0), getattr(x, "col", 0)


def complete_prefix(text: str) -> int:
    """Length of the first complete s-expression in ``text``, or 0 if none yet."""
    depth = 0
    i, n = 0, len(text)
    started = False
    while i < n:
        ch = text[i]
        if ch == "|":
            j = text.find("|", i + 1)
            if j < 0:
                return 0
            i = j + 1
            started = True
            if depth == 0:
                return i
            continue
        if ch == '"':
            j = i + 1
            while True:
                j = text.find('"', j)
                if j < 0:
                    return 0
                if j + 1 < n and text[j + 1] == '"':
                    j += 2
                    continue
                break
            i = j + 1
            started = True
            if depth == 0:
                return i
            continue
        if ch == ";":
            j = text.find("\n", i)
            if j < 0:
                return 0
            i = j + 1
            continue
        if ch == "(":
            depth += 1
            started = True
        elif ch == ")":
            depth -= 1
            if depth == 0:
                return i + 1
        elif not ch.isspace() and depth == 0:
            j = i
            while j < n and not text[j].isspace() and text[j] not in '();|"':
                j += 1
            if j == n:
                return 0  # atom might continue
            return j
        i += 1
    return 0 if not started or depth else 0
