"""Recursive-descent parser for expressions and ``.cdl`` experiment files.

Expression grammar (highest precedence last)::

    sum     := product (('+' | '-') product)*
    product := unary (('*' | '/') unary)*
    unary   := '-' unary | power
    power   := atom ('^' unary)?          # right-associative
    atom    := NUMBER | IMAG | NAME | FUNC '(' sum ')' | '(' sum ')'

``i`` is the imaginary unit; ``3i`` and ``0.5i`` are imaginary literals.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import CdlSyntaxError, UnboundIdentifier
from .ast import CONJ_ALIASES, FUNCTIONS, VARIABLES, Binary, Expr, Num, Unary, Var

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?i?(?![A-Za-z_0-9]))
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*(?:\.[A-Za-z_][A-Za-z_0-9]*)*)
  | (?P<op>[-+*/^(),;={}])
    """,
    re.VERBOSE,
)

EXPR_START = frozenset({"number", "name", "(", "-"})


@dataclass(frozen=True)
class Token:
    kind: str  # 'num' | 'name' | 'op' | 'eof'
    text: str
    line: int
    col: int


def tokenize(source: str) -> list[Token]:
    tokens: list[Token] = []
    pos, line, line_start = 0, 1, 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise CdlSyntaxError(
                f"unexpected character {source[pos]!r}", line, pos - line_start + 1
            )
        kind = m.lastgroup
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind in ("num", "name", "op"):
            tokens.append(Token(kind, m.group(), line, m.start() - line_start + 1))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class Parser:
    def __init__(self, source: str, names: frozenset[str] = VARIABLES):
        self.tokens = tokenize(source)
        self.pos = 0
        self.names = names

    # -- token helpers ------------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        t = self.tokens[self.pos]
        if t.kind != "eof":
            self.pos += 1
        return t

    def at(self, text: str) -> bool:
        return self.tok.kind == "op" and self.tok.text == text

    def fail(self, expected, what: str | None = None):
        t = self.tok
        found = "end of input" if t.kind == "eof" else repr(t.text)
        raise CdlSyntaxError(what or f"unexpected {found}", t.line, t.col, set(expected))

    def expect(self, text: str) -> Token:
        if not self.at(text):
            self.fail({text})
        return self.advance()

    def expect_name(self) -> Token:
        if self.tok.kind != "name":
            self.fail({"name"})
        return self.advance()

    # -- expressions --------------------------------------------------------

    def expr(self) -> Expr:
        node = self.product()
        while self.at("+") or self.at("-"):
            op = self.advance().text
            node = Binary(op, node, self.product())
        return node

    def product(self) -> Expr:
        node = self.unary()
        while self.at("*") or self.at("/"):
            op = self.advance().text
            node = Binary(op, node, self.unary())
        return node

    def unary(self) -> Expr:
        if self.at("-"):
            self.advance()
            return Unary("neg", self.unary())
        return self.power()

    def power(self) -> Expr:
        base = self.atom()
        if self.at("^"):
            self.advance()
            return Binary("^", base, self.unary())
        return base

    def atom(self) -> Expr:
        t = self.tok
        if t.kind == "num":
            self.advance()
            if t.text.endswith("i"):
                return Num(complex(0.0, float(t.text[:-1])))
            return Num(complex(float(t.text), 0.0))
        if t.kind == "name":
            self.advance()
            if t.text in FUNCTIONS:
                self.expect("(")
                arg = self.expr()
                self.expect(")")
                return Unary(t.text, arg)
            if t.text == "i":
                return Num(1j)
            if t.text in CONJ_ALIASES and CONJ_ALIASES[t.text] in self.names:
                return Unary("conj", Var(CONJ_ALIASES[t.text]))
            if t.text in self.names:
                return Var(t.text)
            raise UnboundIdentifier(t.text, t.line, t.col)
        if self.at("("):
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        self.fail(EXPR_START)

    def finish(self) -> None:
        if self.tok.kind != "eof":
            self.fail({"end of input", "+", "-", "*", "/", "^"})


def parse_expr(source: str, names: frozenset[str] = VARIABLES) -> Expr:
    """Parse a single expression; every identifier must be in ``names``."""
    p = Parser(source, names)
    node = p.expr()
    p.finish()
    return node
