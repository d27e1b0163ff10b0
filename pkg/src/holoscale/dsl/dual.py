"""Forward-mode dual numbers over complex scalars with two tangent slots.

A ``Dual`` carries a value and its complex partial derivatives with respect
to z and w. Components may be Python complex numbers or numpy arrays, so a
single pass through an expression yields a whole Jacobian field.
Only holomorphic operations propagate tangents; conjugation and friends are
permitted on tangent-free values alone.
"""

from __future__ import annotations

import numpy as np

from ..errors import EvaluationError


def _lift(x) -> "Dual":
    return x if isinstance(x, Dual) else Dual(x, 0.0, 0.0)


class Dual:
    __slots__ = ("val", "dz", "dw")
    # make numpy defer to the reflected operators instead of broadcasting
    __array_ufunc__ = None

    def __init__(self, val, dz, dw):
        self.val = val
        self.dz = dz
        self.dw = dw

    @classmethod
    def seed_z(cls, z) -> "Dual":
        return cls(z, np.ones_like(z), np.zeros_like(z))

    @classmethod
    def seed_w(cls, w) -> "Dual":
        return cls(w, np.zeros_like(w), np.ones_like(w))

    def _chain(self, val, deriv) -> "Dual":
        return Dual(val, deriv * self.dz, deriv * self.dw)

    def is_constant(self) -> bool:
        return bool(np.all(self.dz == 0) and np.all(self.dw == 0))

    def __add__(self, other):
        o = _lift(other)
        return Dual(self.val + o.val, self.dz + o.dz, self.dw + o.dw)

    __radd__ = __add__

    def __sub__(self, other):
        o = _lift(other)
        return Dual(self.val - o.val, self.dz - o.dz, self.dw - o.dw)

    def __rsub__(self, other):
        return _lift(other) - self

    def __neg__(self):
        return Dual(-self.val, -self.dz, -self.dw)

    def __mul__(self, other):
        o = _lift(other)
        return Dual(
            self.val * o.val,
            self.val * o.dz + self.dz * o.val,
            self.val * o.dw + self.dw * o.val,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = _lift(other)
        q = self.val / o.val
        return Dual(q, (self.dz - q * o.dz) / o.val, (self.dw - q * o.dw) / o.val)

    def __rtruediv__(self, other):
        return _lift(other) / self

    def ipow(self, n: int) -> "Dual":
        """Integer power by repeated squaring; n may be negative."""
        if n == 0:
            return Dual(np.ones_like(self.val), 0.0 * self.dz, 0.0 * self.dw)
        base = self if n > 0 else Dual(1.0, 0.0, 0.0) / self
        m = abs(n)
        val = _int_power(base.val, m)
        deriv = m * _int_power(base.val, m - 1)
        return base._chain(val, deriv)

    def exp(self) -> "Dual":
        e = np.exp(self.val)
        return self._chain(e, e)

    def log(self) -> "Dual":
        return self._chain(np.log(self.val), 1.0 / self.val)

    def sqrt(self) -> "Dual":
        s = np.sqrt(self.val)
        return self._chain(s, 0.5 / s)

    def constant_value(self, op: str):
        if not self.is_constant():
            raise EvaluationError(f"{op}() of a (z, w)-dependent value cannot be differentiated holomorphically")
        return self.val

    def __repr__(self) -> str:
        return f"Dual({self.val!r}, dz={self.dz!r}, dw={self.dw!r})"


def _int_power(x, n: int):
    result = None
    base = x
    while n:
        if n & 1:
            result = base if result is None else result * base
        n >>= 1
        if n:
            base = base * base
    if result is None:
        return np.ones_like(x) if isinstance(x, np.ndarray) else 1.0 + 0j
    return result
