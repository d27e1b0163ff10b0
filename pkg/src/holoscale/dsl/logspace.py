"""Evaluate ``log|e|`` without forming ``e`` where the tree allows it.

Functions such as ``exp(-1/abs(z)^2)`` underflow long before their logarithm
becomes unmanageable; products, quotients, real powers and ``exp`` are
rewritten as sums in log space, everything else falls back to direct
evaluation.
"""

from __future__ import annotations

from typing import Mapping

import numpy as np

from .ast import Binary, Expr, Num, Unary, Var, free_vars
from .evaluate import evaluate


def _log_abs_direct(e: Expr, bindings: Mapping):
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        return np.log(np.abs(evaluate(e, bindings, strict=False)))


def _real_constant(e: Expr):
    if free_vars(e) - {"a", "j"}:
        return None
    return e


def log_abs(e: Expr, bindings: Mapping):
    """``log|e|`` under ``bindings`` (real array or scalar)."""
    if isinstance(e, (Num, Var)):
        return _log_abs_direct(e, bindings)
    if isinstance(e, Unary):
        if e.op in ("neg", "abs", "conj"):
            return log_abs(e.arg, bindings)
        if e.op == "exp":
            with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
                return np.real(evaluate(e.arg, bindings, strict=False))
        if e.op == "sqrt":
            return 0.5 * log_abs(e.arg, bindings)
        return _log_abs_direct(e, bindings)
    if e.op == "+":
        # sums of nonnegative reals combine exactly in log space
        with np.errstate(all="ignore"):
            lv = np.asarray(evaluate(e.left, bindings, strict=False))
            rv = np.asarray(evaluate(e.right, bindings, strict=False))
        if np.all(lv.imag == 0) and np.all(rv.imag == 0) and np.all(lv.real >= 0) and np.all(rv.real >= 0):
            return np.logaddexp(log_abs(e.left, bindings), log_abs(e.right, bindings))
        return _log_abs_direct(e, bindings)
    if e.op == "*":
        return log_abs(e.left, bindings) + log_abs(e.right, bindings)
    if e.op == "/":
        return log_abs(e.left, bindings) - log_abs(e.right, bindings)
    if e.op == "^" and _real_constant(e.right) is not None:
        n = complex(np.asarray(evaluate(e.right, bindings))[()])
        if n.imag == 0:
            return n.real * log_abs(e.left, bindings)
    return _log_abs_direct(e, bindings)
