"""Jacobians of holomorphic map families and their eigenvalue structure.

Derivatives come from one forward-mode dual pass per evaluation, so a whole
grid of Jacobians costs a handful of numpy array operations. A central
difference routine with Richardson extrapolation is kept as an independent
cross-check.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .dsl.config import DEFAULT_TOLERANCES, MapFamily
from .dsl.dual import Dual
from .errors import DegenerateJacobian, Inconclusive, InsufficientGrid

Pair = tuple[complex, complex]


@dataclass(frozen=True)
class Jacobian2:
    a11: complex
    a12: complex
    a21: complex
    a22: complex
    at: Pair = (0j, 0j)

    @property
    def det(self) -> complex:
        return self.a11 * self.a22 - self.a12 * self.a21

    @property
    def trace(self) -> complex:
        return self.a11 + self.a22

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a11, self.a12], [self.a21, self.a22]], dtype=complex)

    @classmethod
    def from_matrix(cls, m, at: Pair = (0j, 0j)) -> "Jacobian2":
        m = np.asarray(m, dtype=complex)
        return cls(complex(m[0, 0]), complex(m[0, 1]), complex(m[1, 0]), complex(m[1, 1]), at)

    def inverse(self, tol: float = DEFAULT_TOLERANCES["det_degenerate"]) -> np.ndarray:
        d = self.det
        if abs(d) < tol:
            raise DegenerateJacobian(f"|det J| = {abs(d):.3e} at {self.at}", op="jacobian")
        return np.array([[self.a22, -self.a12], [-self.a21, self.a11]], dtype=complex) / d


@dataclass(frozen=True)
class EigenPair:
    lambda1: complex
    lambda2: complex
    degenerate: bool


# -- derivatives ----------------------------------------------------------------

def _as_array(x, shape) -> np.ndarray:
    return np.broadcast_to(np.asarray(x, dtype=complex), shape)


def jacobian_field(family: MapFamily, j: int, z, w):
    """Values and Jacobian entries of ``phi_j`` on arrays of points.

    Returns ``(f, g, a11, a12, a21, a22)`` with the broadcast shape of z, w.
    """
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    shape = np.broadcast(z, w).shape
    zero = np.zeros(shape, dtype=complex)
    one = np.ones(shape, dtype=complex)
    dz = Dual(z + zero, one, zero)
    dw = Dual(w + zero, zero, one)
    f, g = family(j, dz, dw)
    out = []
    for comp in (f, g):
        if isinstance(comp, Dual):
            out.append((_as_array(comp.val, shape), _as_array(comp.dz, shape), _as_array(comp.dw, shape)))
        else:
            out.append((_as_array(comp, shape), zero, zero))
    (fv, f_z, f_w), (gv, g_z, g_w) = out
    return fv, gv, f_z, f_w, g_z, g_w


def jacobian(family: MapFamily, j: int, p: Pair) -> Jacobian2:
    _, _, a11, a12, a21, a22 = jacobian_field(family, j, complex(p[0]), complex(p[1]))
    return Jacobian2(complex(a11), complex(a12), complex(a21), complex(a22), (complex(p[0]), complex(p[1])))


def jacobian_fd(family: MapFamily, j: int, p: Pair, h: float = 1e-5) -> Jacobian2:
    """Central complex differences with one Richardson step (error O(h^4))."""
    z0, w0 = complex(p[0]), complex(p[1])

    def central(step, dz, dw):
        fp, gp = family(j, z0 + step * dz, w0 + step * dw)
        fm, gm = family(j, z0 - step * dz, w0 - step * dw)
        return (complex(fp) - complex(fm)) / (2 * step), (complex(gp) - complex(gm)) / (2 * step)

    cols = []
    for dz, dw in ((1, 0), (0, 1)):
        d1 = np.array(central(h, dz, dw))
        d2 = np.array(central(h / 2, dz, dw))
        cols.append((4 * d2 - d1) / 3)
    return Jacobian2(cols[0][0], cols[1][0], cols[0][1], cols[1][1], (z0, w0))


# -- eigenvalues ----------------------------------------------------------------

def _succeeds(x, y, rtol: float = 1e-12):
    """Elementwise ``x > y`` in the order (|.|, Re, Im), ties within rtol."""
    scale = np.maximum(np.maximum(np.abs(x), np.abs(y)), 1e-300) * rtol
    mx, my = np.abs(x), np.abs(y)
    rx, ry = np.real(x), np.real(y)
    same_mod = np.abs(mx - my) <= scale
    same_re = np.abs(rx - ry) <= scale
    return (mx > my + scale) | (same_mod & ((rx > ry + scale) | (same_re & (np.imag(x) > np.imag(y)))))


def eigenvalues(trace, det):
    """Ordered roots of ``x^2 - trace*x + det`` and the discriminant modulus."""
    t = np.asarray(trace, dtype=complex)
    d = np.asarray(det, dtype=complex)
    disc = t * t - 4 * d
    s = np.sqrt(disc)
    # pick the root without cancellation, recover the other from the product
    plus = np.abs(t + s) >= np.abs(t - s)
    r1 = np.where(plus, t + s, t - s) / 2
    with np.errstate(divide="ignore", invalid="ignore"):
        r2 = np.where(r1 != 0, d / np.where(r1 != 0, r1, 1), t - r1)
    swap = _succeeds(r2, r1)
    l1 = np.where(swap, r2, r1)
    l2 = np.where(swap, r1, r2)
    return l1, l2, np.abs(disc)


def eigenpair(J: Jacobian2, tol: float = DEFAULT_TOLERANCES["eig_degenerate"]) -> EigenPair:
    l1, l2, dabs = eigenvalues(J.trace, J.det)
    return EigenPair(complex(l1), complex(l2), bool(dabs < tol))


def op_norm(J: Jacobian2 | np.ndarray) -> float:
    """Largest singular value from the closed form for 2x2 matrices."""
    m = J.matrix if isinstance(J, Jacobian2) else np.asarray(J, dtype=complex)
    return float(op_norm_field(m[0, 0], m[0, 1], m[1, 0], m[1, 1]))


def op_norm_field(a11, a12, a21, a22):
    fro2 = np.abs(a11) ** 2 + np.abs(a12) ** 2 + np.abs(a21) ** 2 + np.abs(a22) ** 2
    det2 = np.abs(a11 * a22 - a12 * a21) ** 2
    gap = np.sqrt(np.maximum(fro2 * fro2 - 4 * det2, 0.0))
    return np.sqrt((fro2 + gap) / 2)


# -- grids ----------------------------------------------------------------------

def disc_lattice(n: int, radius: float, center: complex = 0j) -> np.ndarray:
    """Points of an n x n lattice on [-r, r]^2 that fall in the closed disc."""
    t = np.linspace(-radius, radius, n)
    pts = (t[:, None] + 1j * t[None, :]).ravel()
    pts = pts[np.abs(pts) <= radius * (1 + 1e-12)]
    return center + pts


def tensor_grid(n: int = 21, radius: float = 0.5, center: Pair = (0j, 0j)) -> np.ndarray:
    """Product of two disc lattices, shape (N, 2)."""
    zs = disc_lattice(n, radius, center[0])
    ws = disc_lattice(n, radius, center[1])
    Z, W = np.meshgrid(zs, ws, indexing="ij")
    return np.stack([Z.ravel(), W.ravel()], axis=1)


def compact_grid(center: Pair, radius: float, n: int = 5, jitter: int = 10, seed: int = 0) -> np.ndarray:
    """Tensor grid of lattice points plus ``jitter`` random points per lattice cell.

    Each complex variable gets its own disc of the given radius around the
    center; cells that stick out of the disc keep only their inside jitter.
    """
    rng = np.random.default_rng(seed)
    per_var = []
    for c in center:
        pts = [disc_lattice(n, radius)]
        # the point of largest real part is where Moebius-type factors peak
        pts.append(np.array([radius, -radius, 1j * radius, -1j * radius]))
        if n > 1 and jitter > 0:
            h = 2 * radius / (n - 1)
            corners = -radius + h * np.arange(n - 1)
            cx, cy = np.meshgrid(corners, corners, indexing="ij")
            u = rng.random((cx.size, jitter, 2)) * h
            jit = (cx.ravel()[:, None] + u[..., 0]) + 1j * (cy.ravel()[:, None] + u[..., 1])
            jit = jit.ravel()
            pts.append(jit[np.abs(jit) < radius])
        per_var.append(complex(c) + np.unique(np.concatenate(pts)))
    Z, W = np.meshgrid(per_var[0], per_var[1], indexing="ij")
    return np.stack([Z.ravel(), W.ravel()], axis=1)


# -- eigenvalue fields ------------------------------------------------------------

Sampler = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass
class EigenField:
    """Two scalar fields sampled on points; ``sampler`` re-evaluates them anywhere."""

    points: np.ndarray          # (N, 2) complex
    values: np.ndarray          # (2, N) complex
    degenerate_mask: np.ndarray  # (N,) bool
    sampler: Sampler = field(repr=False)
    #: True when the two rows are roots of one quadratic and may swap order
    paired: bool = True

    @classmethod
    def of_family(cls, family: MapFamily, j: int, points: np.ndarray,
                  tol: float = DEFAULT_TOLERANCES["eig_degenerate"]) -> "EigenField":
        def sampler(z, w):
            _, _, a11, a12, a21, a22 = jacobian_field(family, j, z, w)
            l1, l2, _ = eigenvalues(a11 + a22, a11 * a22 - a12 * a21)
            return np.stack([l1, l2])

        _, _, a11, a12, a21, a22 = jacobian_field(family, j, points[:, 0], points[:, 1])
        l1, l2, dabs = eigenvalues(a11 + a22, a11 * a22 - a12 * a21)
        return cls(points, np.stack([l1, l2]), dabs < tol, sampler)

    @classmethod
    def of_function(cls, fn: Callable, points: np.ndarray) -> "EigenField":
        """A single scalar field ``fn(z, w)`` (used twice) for controls and tests."""

        def sampler(z, w):
            v = np.broadcast_to(np.asarray(fn(z, w), dtype=complex), np.broadcast(z, w).shape)
            return np.stack([v, v])

        vals = sampler(points[:, 0], points[:, 1])
        return cls(points, vals, np.zeros(len(points), dtype=bool), sampler, paired=False)


def _match(center: np.ndarray, cand: np.ndarray):
    """Pick, per row of ``center``, the nearer of the two candidate roots.

    Returns the matched values and a mask of ambiguous matches.
    """
    d_same = np.abs(cand - center)
    d_swap = np.abs(cand[::-1] - center)
    swap = d_swap < d_same
    out = np.where(swap, cand[::-1], cand)
    near = np.minimum(d_same, d_swap)
    far = np.maximum(d_same, d_swap)
    ambiguous = np.any(near > 0.25 * far, axis=0)
    return out, ambiguous


def cr_residual(fld: EigenField, spacing: float = 1e-4, which: Sequence[int] = (0, 1)) -> float:
    """Largest ``|d lam/d zbar| + |d lam/d wbar|`` over unmasked points.

    Wirtinger derivatives come from central differences of step ``spacing``
    in the four real directions. Near points where the two roots swap order
    the neighbours are matched to the root closest to the centre value, and
    points where this matching is ambiguous are dropped along with the
    degenerate ones.
    """
    pts = fld.points
    z, w = pts[:, 0], pts[:, 1]
    center = fld.values
    mask = ~fld.degenerate_mask
    dbar = np.zeros(center.shape)
    h = spacing
    for k, (dz, dw) in enumerate(((1, 0), (0, 1))):
        parts = []
        for step in (h, 1j * h):
            vp = fld.sampler(z + step * dz, w + step * dw)
            vm = fld.sampler(z - step * dz, w - step * dw)
            if fld.paired:
                vp, amb_p = _match(center, vp)
                vm, amb_m = _match(center, vm)
                mask &= ~(amb_p | amb_m)
            parts.append((vp - vm) / (2 * h))
        # d/dzbar = (d/dx + i d/dy) / 2
        dbar += np.abs(0.5 * (parts[0] + 1j * parts[1]))
    for axis in (pts[mask, 0].real, pts[mask, 0].imag, pts[mask, 1].real, pts[mask, 1].imag):
        if np.unique(np.round(axis, 12)).size < 3:
            raise InsufficientGrid("fewer than 3 unmasked points along an axis", op="cr_residual")
    vals = dbar[list(which)][:, mask]
    return float(np.max(vals))


# -- case dichotomy ---------------------------------------------------------------

class Case(str, enum.Enum):
    ACCUMULATION_POINT = "AccumulationPoint"
    ACCUMULATION_VARIETY = "AccumulationVariety"
    COMPACT = "Compact"


def eigen_series(family: MapFamily, q: Pair, js: Sequence[int], tol: float = DEFAULT_TOLERANCES["eig_degenerate"]):
    return [eigenpair(jacobian(family, j, q), tol) for j in js]


def _log_slope(js, mags) -> float:
    logs = np.log(np.maximum(np.asarray(mags, dtype=float), 1e-300))
    return float(np.polyfit(np.asarray(js, dtype=float), logs, 1)[0])


def trend(js: Sequence[int], mags: Sequence[float], tol=None) -> str:
    """'zero', 'away' or 'unclear' for a j-indexed sequence of moduli."""
    tol = {**DEFAULT_TOLERANCES, **(tol or {})}
    js, mags = list(js)[-5:], np.asarray(mags, dtype=float)[-5:]
    if len(mags) < 3:
        return "unclear"
    slope = _log_slope(js, mags)
    decreasing = bool(np.all(np.diff(mags) < 0))
    small = mags[-1] < tol["zero"]
    if (decreasing and slope <= -tol["zero_trend"]) or (small and np.all(np.diff(mags) <= 0)):
        return "zero"
    if not small and slope > -tol["zero_trend"]:
        return "away"
    return "unclear"


def classify_case(family: MapFamily, q: Pair, j_range: Sequence[int], tol=None) -> Case:
    tol = {**DEFAULT_TOLERANCES, **(tol or {})}
    js = list(j_range)
    pairs = eigen_series(family, q, js, tol["eig_degenerate"])
    t1 = trend(js, [abs(p.lambda1) for p in pairs], tol)
    t2 = trend(js, [abs(p.lambda2) for p in pairs], tol)
    if "unclear" in (t1, t2):
        raise Inconclusive(f"eigenvalue trends at q are ({t1}, {t2})", op="classify_case")
    zeros = (t1, t2).count("zero")
    return (Case.COMPACT, Case.ACCUMULATION_VARIETY, Case.ACCUMULATION_POINT)[zeros]


# -- determinant ratios -------------------------------------------------------------

@dataclass(frozen=True)
class DetRatioBounds:
    lower: float
    upper: float
    per_j: tuple[tuple[int, float, float], ...]
    violation_suspected: bool


def det_ratio_field(family: MapFamily, j: int, q: Pair, grid: np.ndarray,
                    tol: float = DEFAULT_TOLERANCES["det_degenerate"]) -> np.ndarray:
    Jq = jacobian(family, j, q)
    dq = Jq.det
    if abs(dq) < tol:
        raise DegenerateJacobian(f"|det J| = {abs(dq):.3e} at q", op="det_ratio_bounds")
    _, _, a11, a12, a21, a22 = jacobian_field(family, j, grid[:, 0], grid[:, 1])
    det = a11 * a22 - a12 * a21
    if np.any(np.abs(det) < tol):
        raise DegenerateJacobian("Jacobian determinant vanishes on the grid", op="det_ratio_bounds")
    return np.abs(det / dq)


def det_ratio_bounds(family: MapFamily, q: Pair, grid: np.ndarray, j_range: Sequence[int], tol=None) -> DetRatioBounds:
    """Observed range of ``|det((J phi_j(q))^-1 J phi_j(p))|`` over grid and j."""
    tol = {**DEFAULT_TOLERANCES, **(tol or {})}
    rows = []
    for j in j_range:
        r = det_ratio_field(family, j, q, grid, tol["det_degenerate"])
        rows.append((j, float(r.min()), float(r.max())))
    lo = min(r[1] for r in rows)
    hi = max(r[2] for r in rows)
    suspect = False
    if len(rows) >= 3:
        js = [r[0] for r in rows]
        tail = slice(-min(5, len(rows)), None)
        lo_slope = _log_slope(js[tail], [r[1] for r in rows][tail])
        hi_slope = _log_slope(js[tail], [r[2] for r in rows][tail])
        suspect = lo_slope < -tol["det_trend"] or hi_slope > tol["det_trend"]
    return DetRatioBounds(lo, hi, tuple(rows), suspect)
