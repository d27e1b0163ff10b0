"""Expression trees for defining functions and holomorphic map families."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Union

#: identifiers with a fixed meaning in every expression
VARIABLES = frozenset({"z", "w", "u", "a", "j"})
#: ``zb``/``wb`` are sugar for ``conj(z)``/``conj(w)``
CONJ_ALIASES = {"zb": "z", "wb": "w"}
FUNCTIONS = frozenset({"re", "im", "abs", "conj", "exp", "log", "sqrt", "neg"})
NON_HOLOMORPHIC_FUNCTIONS = frozenset({"re", "im", "abs", "conj"})
BINARY_OPS = ("+", "-", "*", "/", "^")

# variables that carry (z, w) dependence; u = Re w
_SPACE_VARS = frozenset({"z", "w", "u"})


@dataclass(frozen=True)
class Num:
    value: complex


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Unary:
    op: str
    arg: "Expr"


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"


Expr = Union[Num, Var, Unary, Binary]


def walk(e: Expr) -> Iterator[Expr]:
    """Pre-order traversal."""
    stack = [e]
    while stack:
        node = stack.pop()
        yield node
        if isinstance(node, Binary):
            stack.append(node.right)
            stack.append(node.left)
        elif isinstance(node, Unary):
            stack.append(node.arg)


def node_count(e: Expr) -> int:
    return sum(1 for _ in walk(e))


def free_vars(e: Expr) -> frozenset[str]:
    return frozenset(n.name for n in walk(e) if isinstance(n, Var))


def depends_on_space(e: Expr) -> bool:
    """True if ``e`` mentions z, w or u."""
    return any(isinstance(n, Var) and n.name in _SPACE_VARS for n in walk(e))


def is_holomorphic(e: Expr) -> bool:
    """Syntactic holomorphy check in (z, w).

    Fails on any occurrence of ``u`` and on re/im/abs/conj applied to a
    subtree that depends on z or w. Conjugating a parameter is fine.
    """
    for n in walk(e):
        if isinstance(n, Var) and n.name == "u":
            return False
        if isinstance(n, Unary) and n.op in NON_HOLOMORPHIC_FUNCTIONS and depends_on_space(n.arg):
            return False
    return True


def is_constant(e: Expr) -> bool:
    return not free_vars(e)
