"""Lexer and reader for PROSIT program text.

Expressions are plain Python values:

* numbers are ``int`` (exact) or ``float``
* strings are ``str``
* parameters are :class:`Param`, variables are :class:`Var`
* lists are ``tuple`` of expressions

A bare ``!`` or ``?`` at top level reads as :class:`ModeSwitch`.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Union

from .errors import LexError, ParseError


@dataclass(frozen=True, slots=True)
class Param:
    name: str

    def __repr__(self) -> str:
        return self.name


@dataclass(frozen=True, slots=True)
class Var:
    name: str
    # 0 for variables written in source; renamed copies get a fresh scope.
    scope: int = 0

    def __repr__(self) -> str:
        return self.name if self.scope == 0 else f"{self.name}#{self.scope}"


@dataclass(frozen=True, slots=True)
class ModeSwitch:
    """A standalone ``!`` (assert mode) or ``?`` (query mode)."""

    mode: str


Expression = Union[int, float, str, Param, Var, tuple]


@dataclass(frozen=True, slots=True)
class Token:
    kind: str  # 'open', 'close', 'atom', 'string', 'mode'
    text: str
    span: tuple[int, int]


_INT_RE = re.compile(r"[+-]?\d+\Z")
_FLOAT_RE = re.compile(r"[+-]?(\d+\.\d*|\.\d+|\d+)([eE][+-]?\d+)?\Z")
_DELIMS = "(); \t\r\n\f\v"


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    i, n, depth = 0, len(source), 0
    while i < n:
        c = source[i]
        if c.isspace():
            i += 1
        elif c == ";":
            j = source.find("\n", i)
            i = n if j < 0 else j + 1
        elif c == "(":
            tokens.append(Token("open", c, (i, i + 1)))
            depth += 1
            i += 1
        elif c == ")":
            tokens.append(Token("close", c, (i, i + 1)))
            depth = max(depth - 1, 0)
            i += 1
        elif c == "'":
            j = source.find("'", i + 1)
            if j < 0:
                raise LexError("unterminated string literal", (i, n))
            tokens.append(Token("string", source[i:j + 1], (i, j + 1)))
            i = j + 1
        else:
            j = i
            while j < n and source[j] not in _DELIMS:
                j += 1
            text = source[i:j]
            kind = "mode" if depth == 0 and text in ("!", "?") else "atom"
            tokens.append(Token(kind, text, (i, j)))
            i = j
    return tokens


def classify_atom(text: str) -> Expression:
    if _INT_RE.match(text):
        return int(text)
    if _FLOAT_RE.match(text):
        return float(text)
    if len(text) >= 2 and text[0] == "'" and text[-1] == "'":
        return text[1:-1]
    if text.startswith("*") and text != "*":
        return Var(text)
    return Param(text)


def parse(tokens: list[Token]) -> list[Expression | ModeSwitch]:
    forms: list[Expression | ModeSwitch] = []
    stack: list[tuple[Token, list]] = []
    for tok in tokens:
        if tok.kind == "open":
            stack.append((tok, []))
            continue
        if tok.kind == "close":
            if not stack:
                raise ParseError("unbalanced ')'", tok.span)
            _, items = stack.pop()
            value: Expression | ModeSwitch = tuple(items)
        elif tok.kind == "mode":
            value = ModeSwitch(tok.text)
        else:
            value = classify_atom(tok.text)
        if stack:
            stack[-1][1].append(value)
        else:
            forms.append(value)
    if stack:
        raise ParseError("unbalanced '(': missing ')'", stack[-1][0].span)
    return forms


def read(source: str) -> list[Expression | ModeSwitch]:
    """Tokenize and parse ``source``."""
    return parse(tokenize(source))


def read_one(source: str) -> Expression:
    forms = read(source)
    if len(forms) != 1 or isinstance(forms[0], ModeSwitch):
        raise ParseError(f"expected exactly one expression, got {len(forms)}", (0, len(source)))
    return forms[0]


def to_text(e: Expression | ModeSwitch) -> str:
    """Canonical s-expression text; ``read_one(to_text(e)) == e``."""
    if isinstance(e, tuple):
        return "(" + " ".join(to_text(x) for x in e) + ")"
    if isinstance(e, str):
        return f"'{e}'"
    if isinstance(e, bool):
        return "true" if e else "false"
    if isinstance(e, float):
        return repr(e)
    if isinstance(e, ModeSwitch):
        return e.mode
    return repr(e)
