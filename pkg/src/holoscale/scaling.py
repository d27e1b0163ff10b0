"""Frankel and eigenvector scalings, normality diagnostics, model domains."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .dsl.ast import Expr
from .dsl.config import DEFAULT_TOLERANCES, MapFamily
from .dsl.evaluate import evaluate
from .errors import DegenerateEigenvectors, DegenerateJacobian
from .holo_diff import Pair, eigenpair, jacobian, jacobian_field, op_norm_field


class Mode(str, enum.Enum):
    FRANKEL = "Frankel"
    VARIETY = "VarietyEigen"


@dataclass(frozen=True)
class ScalingStep:
    j: int
    mode: Mode
    normalizer: np.ndarray  # 2x2 complex
    anchor: Pair
    family: MapFamily

    def map(self, z, w):
        """Scaled map ``normalizer @ (phi_j(z, w) - anchor)``."""
        f, g = self.family(self.j, np.asarray(z, dtype=complex), np.asarray(w, dtype=complex))
        f = f - self.anchor[0]
        g = g - self.anchor[1]
        N = self.normalizer
        return N[0, 0] * f + N[0, 1] * g, N[1, 0] * f + N[1, 1] * g

    __call__ = map

    def jacobian_at(self, p: Pair) -> np.ndarray:
        return self.normalizer @ jacobian(self.family, self.j, p).matrix


def _phi(family: MapFamily, j: int, p: Pair) -> Pair:
    f, g = family(j, complex(p[0]), complex(p[1]))
    return complex(f), complex(g)


def frankel_scale(family: MapFamily, q: Pair, j: int, tol=None) -> ScalingStep:
    """``A_j = (J phi_j(q))^-1 (phi_j - phi_j(q))``."""
    tol = {**DEFAULT_TOLERANCES, **(tol or {})}
    J = jacobian(family, j, q)
    try:
        inv = J.inverse(tol["det_degenerate"])
    except DegenerateJacobian as exc:
        raise DegenerateJacobian(str(exc), op="frankel_scale") from None
    return ScalingStep(j, Mode.FRANKEL, inv, _phi(family, j, q), family)


def unit_eigenvector(m: np.ndarray, lam: complex) -> np.ndarray:
    """Unit eigenvector for ``lam`` with the largest component made real positive."""
    a = m - lam * np.eye(2)
    # both rows of (J - lam) annihilate v; use the better-conditioned one
    c1 = np.array([-a[0, 1], a[0, 0]])
    c2 = np.array([-a[1, 1], a[1, 0]])
    v = c1 if np.linalg.norm(c1) >= np.linalg.norm(c2) else c2
    n = np.linalg.norm(v)
    if n == 0:
        # J = lam * I: every direction is an eigenvector
        v, n = np.array([1, 0], dtype=complex), 1.0
    v = v / n
    k = int(np.argmax(np.abs(v)))
    return v * (abs(v[k]) / v[k])


def variety_scale(family: MapFamily, q: Pair, j: int, tol=None, *, centered: bool = False) -> ScalingStep:
    """``B_j^-1 phi_j`` with ``B_j^-1 = diag(1, 1/lam2) [u; v]`` (unit eigenvector rows).

    ``centered=True`` subtracts ``phi_j(q)`` first so the scaled base point
    stays at the origin.
    """
    tol = {**DEFAULT_TOLERANCES, **(tol or {})}
    J = jacobian(family, j, q)
    ep = eigenpair(J, tol["eig_degenerate"])
    if ep.degenerate:
        raise DegenerateEigenvectors(f"repeated eigenvalue {ep.lambda1} at q (j={j})", op="variety_scale")
    m = J.matrix
    rows = np.stack([unit_eigenvector(m, ep.lambda1), unit_eigenvector(m, ep.lambda2)])
    d = abs(np.linalg.det(rows))
    if d < tol["eigvec_indep"]:
        raise DegenerateEigenvectors(f"|det| of eigenvector matrix is {d:.3e} (j={j})", op="variety_scale")
    if ep.lambda2 == 0:
        raise DegenerateJacobian("second eigenvalue vanishes at q", op="variety_scale")
    normalizer = np.diag([1.0, 1.0 / ep.lambda2]) @ rows
    anchor = _phi(family, j, q) if centered else (0j, 0j)
    return ScalingStep(j, Mode.VARIETY, normalizer, anchor, family)


# -- normality ----------------------------------------------------------------------

def scaled_jacobian_norms(family: MapFamily, q: Pair, j: int, grid: np.ndarray, tol=None) -> np.ndarray:
    tol = {**DEFAULT_TOLERANCES, **(tol or {})}
    inv = jacobian(family, j, q).inverse(tol["det_degenerate"])
    _, _, a11, a12, a21, a22 = jacobian_field(family, j, grid[:, 0], grid[:, 1])
    det = a11 * a22 - a12 * a21
    if np.any(np.abs(det) < tol["det_degenerate"]):
        raise DegenerateJacobian("Jacobian determinant vanishes on the grid", op="norm_sup")
    b11 = inv[0, 0] * a11 + inv[0, 1] * a21
    b12 = inv[0, 0] * a12 + inv[0, 1] * a22
    b21 = inv[1, 0] * a11 + inv[1, 1] * a21
    b22 = inv[1, 0] * a12 + inv[1, 1] * a22
    return op_norm_field(b11, b12, b21, b22)


def norm_sup(family: MapFamily, q: Pair, j: int, grid: np.ndarray, tol=None) -> float:
    """``M_j = max_p ||(J phi_j(q))^-1 J phi_j(p)||_op`` over the grid."""
    try:
        return float(np.max(scaled_jacobian_norms(family, q, j, grid, tol)))
    except DegenerateJacobian as exc:
        raise DegenerateJacobian(str(exc), op="norm_sup") from None


class Normality(str, enum.Enum):
    BOUNDED = "Bounded"
    UNBOUNDED = "Unbounded"
    INCONCLUSIVE = "Inconclusive"


def growth_slope(M: Sequence[float]) -> tuple[float, float]:
    """Least-squares slope of ``log M_j`` against j and the fit's R^2."""
    y = np.log(np.asarray(M, dtype=float))
    x = np.arange(len(y), dtype=float)
    slope, icpt = np.polyfit(x, y, 1)
    resid = y - (slope * x + icpt)
    ss = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid**2)) / ss if ss > 0 else 1.0
    return float(slope), r2


def normality_diagnostic(M: Sequence[float], tol=None) -> Normality:
    """Classify a run of consecutive ``M_j`` values (at least six)."""
    tol = {**DEFAULT_TOLERANCES, **(tol or {})}
    M = np.asarray(M, dtype=float)
    if len(M) < 6 or not np.all(np.isfinite(M)) or np.any(M <= 0):
        return Normality.INCONCLUSIVE
    slope, r2 = growth_slope(M)
    if slope > tol["norm_growth"] and r2 > 0.9:
        return Normality.UNBOUNDED
    tail = M[len(M) // 2:]
    med = float(np.median(tail))
    if tail.max() <= (1 + tol["norm_flat"]) * med and med <= (1 + tol["norm_flat"]) * tail.min():
        if tail.max() / tail.min() <= 1 + tol["norm_flat"]:
            return Normality.BOUNDED
    return Normality.INCONCLUSIVE


# -- model domains ------------------------------------------------------------------

@dataclass(frozen=True)
class RtimesDomain:
    """``{|z| < 1, w in e^{i theta(z)} H+}``; theta is an expression in z or a callable."""

    theta: Expr | Callable | float = 0.0

    def theta_at(self, z):
        if callable(self.theta):
            return np.real(self.theta(z))
        if isinstance(self.theta, (int, float)):
            return np.full(np.shape(z), float(self.theta))
        return np.real(evaluate(self.theta, {"z": np.asarray(z, dtype=complex)}, strict=False))

    def contains(self, z, w):
        z = np.asarray(z, dtype=complex)
        w = np.asarray(w, dtype=complex)
        return (np.abs(z) < 1) & (np.imag(np.exp(-1j * self.theta_at(z)) * w) > 0)


def rtimes_membership(d: RtimesDomain, p: Pair):
    out = d.contains(p[0], p[1])
    return bool(out) if np.ndim(out) == 0 else out


def model_action(kind: str, param: float, p: Pair):
    """``L_n = (z, w/n)``, translation ``(z, w + t)``, dilation ``(z, w e^{-t})``."""
    z, w = p
    if kind == "L_n":
        return z, w / param
    if kind == "L_t_translate":
        return z, w + param
    if kind == "L_t_dilate":
        return z, w * np.exp(-param)
    raise ValueError(f"unknown model action {kind!r}")
