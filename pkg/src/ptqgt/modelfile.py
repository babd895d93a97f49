"""Declarative model files describing a matrix-valued Hamiltonian family.

Format (one statement per line, ``#`` starts a comment)::

    dim 2
    params 3
    H[1,1] = l3
    H[1,2] = l1 - i*l2
    H[2,1] = l1 + i*l2
    H[2,2] = -l3

``dim`` is the Hilbert-space size N, ``params`` the parameter count d.
Matrix indices are 1-based; unspecified entries are zero. Entry
expressions use the grammar

    expr   := term (('+' | '-') term)*
    term   := unary (('*' | '/') unary)*
    unary  := '-' unary | atom
    atom   := NUMBER ['i'] | 'i' | PARAM | FUNC '(' expr ')' | '(' expr ')'
    FUNC   := 'sin' | 'cos' | 'exp'
    PARAM  := 'l' DIGITS          (l1 .. ld)

A number with a trailing ``i`` (or a bare ``i``) is an imaginary
literal. Parsing is a hand-written recursive descent with line/column
positions in error messages.
"""

from __future__ import annotations

import cmath
import re
from dataclasses import dataclass

import numpy as np

from .biortho import HamiltonianFamily
from .errors import ParseError

__all__ = ["parse_expression", "parse_model", "load_model"]

_FUNCS = {"sin": cmath.sin, "cos": cmath.cos, "exp": cmath.exp}

_TOKEN_RE = re.compile(
    r"\s*(?:(?P<number>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?i?)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/()]))"
)


@dataclass(frozen=True)
class _Token:
    kind: str  # 'number' | 'name' | 'op' | 'end'
    text: str
    col: int


def _tokenize(source: str, line: int):
    tokens = []
    pos = 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            rest = source[pos:].lstrip()
            if not rest:
                break
            col = pos + (len(source[pos:]) - len(rest)) + 1
            raise ParseError(f"unexpected character {rest[0]!r}", line, col)
        kind = m.lastgroup
        tokens.append(_Token(kind=kind, text=m.group(kind), col=m.start(kind) + 1))
        pos = m.end()
    tokens.append(_Token(kind="end", text="", col=len(source) + 1))
    return tokens


class _Parser:
    """Recursive-descent parser producing a closure lam -> complex."""

    def __init__(self, source: str, line: int, n_params: int):
        self.tokens = _tokenize(source, line)
        self.line = line
        self.n_params = n_params
        self.i = 0

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def next(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op: str):
        tok = self.next()
        if tok.kind != "op" or tok.text != op:
            raise ParseError(f"expected {op!r}, found {tok.text or 'end of line'!r}",
                             self.line, tok.col)

    def parse(self):
        fn = self.expr()
        tok = self.peek()
        if tok.kind != "end":
            raise ParseError(f"trailing input {tok.text!r}", self.line, tok.col)
        return fn

    def expr(self):
        fn = self.term()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.next().text
            rhs = self.term()
            lhs = fn
            if op == "+":
                fn = lambda lam, a=lhs, b=rhs: a(lam) + b(lam)
            else:
                fn = lambda lam, a=lhs, b=rhs: a(lam) - b(lam)
        return fn

    def term(self):
        fn = self.unary()
        while self.peek().kind == "op" and self.peek().text in "*/":
            op = self.next().text
            rhs = self.unary()
            lhs = fn
            if op == "*":
                fn = lambda lam, a=lhs, b=rhs: a(lam) * b(lam)
            else:
                fn = lambda lam, a=lhs, b=rhs: a(lam) / b(lam)
        return fn

    def unary(self):
        tok = self.peek()
        if tok.kind == "op" and tok.text == "-":
            self.next()
            inner = self.unary()
            return lambda lam, f=inner: -f(lam)
        return self.atom()

    def atom(self):
        tok = self.next()
        if tok.kind == "number":
            if tok.text.endswith("i"):
                value = complex(0.0, float(tok.text[:-1]))
            else:
                value = complex(float(tok.text), 0.0)
            return lambda lam, v=value: v
        if tok.kind == "name":
            name = tok.text
            if name == "i":
                return lambda lam: 1j
            if name in _FUNCS:
                self.expect_op("(")
                inner = self.expr()
                self.expect_op(")")
                return lambda lam, f=_FUNCS[name], g=inner: f(g(lam))
            m = re.fullmatch(r"l(\d+)", name)
            if m:
                idx = int(m.group(1))
                if not 1 <= idx <= self.n_params:
                    raise ParseError(
                        f"parameter {name} out of range (params = {self.n_params})",
                        self.line, tok.col,
                    )
                return lambda lam, j=idx - 1: complex(lam[j])
            raise ParseError(f"unknown identifier {name!r}", self.line, tok.col)
        if tok.kind == "op" and tok.text == "(":
            inner = self.expr()
            self.expect_op(")")
            return inner
        raise ParseError(
            f"expected a value, found {tok.text or 'end of line'!r}", self.line, tok.col
        )


def parse_expression(source: str, n_params: int, line: int = 1):
    """Compile a single entry expression to a callable lam -> complex."""
    return _Parser(source, line, n_params).parse()


_ENTRY_RE = re.compile(r"H\[(\d+)\s*,\s*(\d+)\]\s*=\s*(.+)")


def parse_model(text: str) -> HamiltonianFamily:
    """Parse a full model description into a HamiltonianFamily."""
    dim = None
    n_params = None
    entries = {}

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("dim"):
            try:
                dim = int(line.split()[1])
            except (IndexError, ValueError):
                raise ParseError("malformed 'dim' statement", lineno, 1)
            continue
        if line.startswith("params"):
            try:
                n_params = int(line.split()[1])
            except (IndexError, ValueError):
                raise ParseError("malformed 'params' statement", lineno, 1)
            continue
        m = _ENTRY_RE.fullmatch(line)
        if m is None:
            raise ParseError(f"unrecognized statement {line!r}", lineno, 1)
        if dim is None or n_params is None:
            raise ParseError("'dim' and 'params' must precede entries", lineno, 1)
        row, col = int(m.group(1)), int(m.group(2))
        if not (1 <= row <= dim and 1 <= col <= dim):
            raise ParseError(f"index [{row},{col}] outside a {dim}x{dim} matrix",
                             lineno, 1)
        expr = parse_expression(m.group(3), n_params, line=lineno)
        entries[(row - 1, col - 1)] = expr

    if dim is None or n_params is None:
        raise ParseError("model must declare 'dim' and 'params'")

    def evaluate(lam, _entries=entries, _dim=dim):
        out = np.zeros((_dim, _dim), dtype=complex)
        for (r, c), fn in _entries.items():
            out[r, c] = fn(lam)
        return out

    return HamiltonianFamily(dim_hilbert=dim, dim_param=n_params, evaluate=evaluate)


def load_model(path) -> HamiltonianFamily:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_model(fh.read())
