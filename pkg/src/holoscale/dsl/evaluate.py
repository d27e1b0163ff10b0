"""Evaluation of expression trees.

Values may be complex scalars, complex numpy arrays (grid sweeps) or
:class:`~holoscale.dsl.dual.Dual` numbers (Jacobians). Multivalued functions
use principal branches.

``strict=True`` raises on division by zero and on log/sqrt of zero.
``strict=False`` follows IEEE arithmetic with one extension for real-valued
defining functions: ``x/0`` with real ``x != 0`` is a signed real infinity,
so ``exp(-1/abs(z)^2)`` evaluates to its smooth extension 0 at ``z = 0``.
"""

from __future__ import annotations

import math
from typing import Mapping

import numpy as np

from ..errors import BranchCutViolation, DivisionByZero, UnboundIdentifier
from .ast import Binary, Expr, Num, Unary, Var
from .dual import Dual, _int_power


def _val(x):
    return x.val if isinstance(x, Dual) else x


def _clean_zero_imag(x):
    # signed zeros would otherwise select the lower side of the branch cut
    if isinstance(x, np.ndarray):
        return np.where(x.imag == 0, x.real + 0j, x)
    x = complex(x)
    return complex(x.real, 0.0) if x.imag == 0 else x


def _any_zero(x) -> bool:
    return bool(np.any(_val(x) == 0))


def _divide(num, den, strict: bool):
    if strict:
        if _any_zero(den):
            raise DivisionByZero("division by zero")
        return num / den
    if isinstance(num, Dual) or isinstance(den, Dual):
        return num / den
    n = np.asarray(num, dtype=complex)
    d = np.asarray(den, dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = n / d
        zero = d == 0
        if np.any(zero):
            real_num = zero & (n.imag == 0) & (n.real != 0)
            inf = np.copysign(np.inf, n.real) + 0j
            out = np.where(real_num, inf, out)
    return out if out.ndim else complex(out)


def _exp(x, strict: bool):
    if isinstance(x, Dual):
        return x.exp()
    with np.errstate(over="ignore", invalid="ignore"):
        if strict:
            return np.exp(x)
        arr = np.asarray(x, dtype=complex)
        out = np.exp(arr)
        # exp(-inf + 0i) is 0 in the extended reals; numpy may produce nan
        out = np.where((arr.real == -np.inf) & (arr.imag == 0), 0j, out)
        return out if out.ndim else complex(out)


def _log(x, strict: bool):
    if isinstance(x, Dual):
        if _any_zero(x):
            raise BranchCutViolation("log of zero")
        return Dual(_clean_zero_imag(x.val), x.dz, x.dw).log()
    if _any_zero(x):
        if strict:
            raise BranchCutViolation("log of zero")
    with np.errstate(divide="ignore"):
        return np.log(_clean_zero_imag(x))


def _sqrt(x, strict: bool):
    if isinstance(x, Dual):
        if _any_zero(x):
            raise BranchCutViolation("sqrt of zero")
        return Dual(_clean_zero_imag(x.val), x.dz, x.dw).sqrt()
    if strict and _any_zero(x):
        raise BranchCutViolation("sqrt of zero")
    return np.sqrt(_clean_zero_imag(x))


def _integer_exponent(b):
    """Return ``int(b)`` when ``b`` is a tangent-free scalar integer, else None."""
    if isinstance(b, Dual):
        if not b.is_constant():
            return None
        b = b.val
    if isinstance(b, np.ndarray):
        if b.ndim:
            return None
        b = b[()]
    b = complex(b)
    if b.imag == 0 and math.isfinite(b.real) and b.real == int(b.real) and abs(b.real) <= 1 << 20:
        return int(b.real)
    return None


def _power(a, b, strict: bool):
    n = _integer_exponent(b)
    if n is not None:
        if isinstance(a, Dual):
            if n < 0 and _any_zero(a):
                raise DivisionByZero("negative power of zero")
            return a.ipow(n)
        if n >= 0:
            return _int_power(a, n)
        return _divide(1.0 + 0j, _int_power(a, -n), strict)
    if _any_zero(a):
        if strict:
            raise BranchCutViolation("non-integer power of zero")
        if isinstance(a, Dual) or isinstance(b, Dual):
            raise BranchCutViolation("non-integer power of zero")
        bb = np.asarray(b, dtype=complex)
        aa = np.asarray(a, dtype=complex)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.exp(bb * np.log(_clean_zero_imag(aa)))
        out = np.where((aa == 0) & (bb.real > 0), 0j, out)
        return out if out.ndim else complex(out)
    la = _log(a, strict)
    return _exp(la * b, strict)


def _nonholo(op: str, x):
    if isinstance(x, Dual):
        x = x.constant_value(op)
    if op == "conj":
        return np.conj(x)
    if op == "re":
        return np.real(x) + 0j
    if op == "im":
        return np.imag(x) + 0j
    return np.abs(x) + 0j


def _lookup(name: str, bindings: Mapping):
    if name in bindings:
        return bindings[name]
    if name == "u" and "w" in bindings:
        w = bindings["w"]
        return _nonholo("re", w)
    raise UnboundIdentifier(name, op="eval")


def evaluate(e: Expr, bindings: Mapping, *, strict: bool = True):
    """Evaluate ``e`` under ``bindings`` (name -> value).

    ``u`` falls back to ``Re w`` when not bound explicitly.
    """
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Var):
        return _lookup(e.name, bindings)
    if isinstance(e, Unary):
        x = evaluate(e.arg, bindings, strict=strict)
        op = e.op
        if op == "neg":
            return -x
        if op == "exp":
            return _exp(x, strict)
        if op == "log":
            return _log(x, strict)
        if op == "sqrt":
            return _sqrt(x, strict)
        return _nonholo(op, x)
    left = evaluate(e.left, bindings, strict=strict)
    right = evaluate(e.right, bindings, strict=strict)
    op = e.op
    if op == "+":
        return left + right
    if op == "-":
        return left - right
    if op == "*":
        return left * right
    if op == "/":
        return _divide(left, right, strict)
    return _power(left, right, strict)


def evaluate_scalar(e: Expr, bindings: Mapping, *, strict: bool = True) -> complex:
    v = evaluate(e, bindings, strict=strict)
    return complex(np.asarray(v)[()])
