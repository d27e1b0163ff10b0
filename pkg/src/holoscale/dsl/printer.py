"""Pretty printer with minimal parentheses.

The output re-parses to a tree whose printout is identical, so
``fmt(parse(fmt(e))) == fmt(e)`` for every tree ``e``.
"""

from __future__ import annotations

import math

from .ast import Binary, Expr, Num, Unary, Var

# precedence levels
_SUM, _PRODUCT, _UNARY, _POWER, _ATOM = 1, 2, 3, 4, 5


def format_real(x: float) -> str:
    if not math.isfinite(x):
        raise ValueError(f"cannot print non-finite literal {x!r}")
    if x == int(x) and abs(x) < 1e16:
        return str(int(x))
    return repr(x)


def _canonical(n: Num) -> Expr:
    """Rewrite a literal into the tree the parser would produce for it."""
    re_, im_ = n.value.real, n.value.imag
    if im_ == 0.0:
        if re_ < 0:
            return Unary("neg", Num(complex(-re_, 0.0)))
        return n
    if re_ == 0.0:
        if im_ < 0:
            return Unary("neg", Num(complex(0.0, -im_)))
        return n
    imag = Num(complex(0.0, abs(im_)))
    return Binary("+" if im_ > 0 else "-", _canonical(Num(complex(re_, 0.0))), imag)


def _prec(e: Expr) -> int:
    if isinstance(e, Num):
        c = _canonical(e)
        return _ATOM if c is e else _prec(c)
    if isinstance(e, Var):
        return _ATOM
    if isinstance(e, Unary):
        return _UNARY if e.op == "neg" else _ATOM
    if e.op in "+-":
        return _SUM
    if e.op in "*/":
        return _PRODUCT
    return _POWER


def _wrap(e: Expr, level: int) -> str:
    s = fmt(e)
    return f"({s})" if _prec(e) < level else s


def fmt(e: Expr) -> str:
    if isinstance(e, Num):
        c = _canonical(e)
        if c is not e:
            return fmt(c)
        if e.value.imag == 0.0:
            return format_real(e.value.real)
        if e.value.imag == 1.0:
            return "i"
        return format_real(e.value.imag) + "i"
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Unary):
        if e.op == "neg":
            return "-" + _wrap(e.arg, _UNARY)
        return f"{e.op}({fmt(e.arg)})"
    if e.op in "+-":
        return f"{_wrap(e.left, _SUM)} {e.op} {_wrap(e.right, _PRODUCT)}"
    if e.op in "*/":
        return f"{_wrap(e.left, _PRODUCT)}{e.op}{_wrap(e.right, _UNARY)}"
    return f"{_wrap(e.left, _ATOM)}^{_wrap(e.right, _UNARY)}"
