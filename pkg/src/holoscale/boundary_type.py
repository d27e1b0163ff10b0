"""Boundary normal forms, D'Angelo type estimates and infinite-type diagnostics.

A boundary point is moved to the origin by a translation and a unitary
frame so that the domain reads ``Im w > rho(z, zb, Re w)`` nearby. The type
search probes ``rho`` along analytic discs and measures orders of vanishing
from log-log slopes on a geometric ladder. Everything that compares values
of ``rho`` close to the origin works with ``log rho`` so that flat functions
like ``exp(-1/|z|^2)`` stay representable.
"""

from __future__ import annotations

import enum
import itertools
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .dsl.ast import Expr
from .dsl.config import DEFAULT_TOLERANCES, DefiningFunction, Domain, MapFamily
from .dsl.evaluate import evaluate
from .dsl.logspace import log_abs
from .errors import (
    DegenerateGradient,
    Inconclusive,
    NoiseFloor,
    NonConvergentRatio,
    SolveFailure,
)
from .holo_diff import Pair, disc_lattice, jacobian

LN2 = np.log(2.0)


# -- defining functions ------------------------------------------------------------

@dataclass(frozen=True)
class Rho:
    """Real function ``rho(z, u)``; ``expr`` enables exact log-space evaluation."""

    fn: Callable
    expr: Expr | None = None

    @classmethod
    def of(cls, obj) -> "Rho":
        if isinstance(obj, Rho):
            return obj
        if isinstance(obj, DefiningFunction):
            obj = obj.expr
        if isinstance(obj, (Expr.__args__)):
            e = obj

            def fn(z, u):
                with np.errstate(all="ignore"):
                    return np.real(evaluate(e, {"z": z, "u": u + 0j}, strict=False))

            return cls(fn, e)
        if callable(obj):
            return cls(obj)
        raise TypeError(f"cannot use {obj!r} as a defining function")

    def __call__(self, z, u=0.0):
        z = np.asarray(z, dtype=complex)
        u = np.asarray(u, dtype=float)
        return np.asarray(self.fn(z, u), dtype=float)

    def log(self, z, u=0.0):
        """``log|rho|``; exact in log space for expression-backed functions."""
        z = np.asarray(z, dtype=complex)
        u = np.asarray(u, dtype=float)
        if self.expr is not None:
            with np.errstate(all="ignore"):
                out = log_abs(self.expr, {"z": z, "u": u + 0j})
            return np.broadcast_to(np.asarray(out, dtype=float), np.broadcast(z, u).shape)
        with np.errstate(divide="ignore"):
            return np.log(np.abs(self(z, u)))


# -- normal form ----------------------------------------------------------------------

@dataclass(frozen=True)
class NormalForm:
    rho_full: Rho
    translation: Pair
    frame: np.ndarray  # columns e_z, e_w
    #: numerical solution of the boundary equation, kept for cross-checks
    solved: Rho | None = None

    def rho0(self, z):
        return self.rho_full(z, 0.0)

    def log_rho0(self, z):
        return self.rho_full.log(z, 0.0)

    def to_normal(self, z, w):
        dz = np.asarray(z, dtype=complex) - self.translation[0]
        dw = np.asarray(w, dtype=complex) - self.translation[1]
        U = self.frame
        return (np.conj(U[0, 0]) * dz + np.conj(U[1, 0]) * dw,
                np.conj(U[0, 1]) * dz + np.conj(U[1, 1]) * dw)

    def from_normal(self, zn, wn):
        U = self.frame
        return (self.translation[0] + U[0, 0] * zn + U[0, 1] * wn,
                self.translation[1] + U[1, 0] * zn + U[1, 1] * wn)

    def u_linear_coefficient(self, z, h: float = 1e-5):
        """``C(z) = d rho/du`` at ``u = 0`` by central differences."""
        return (self.rho_full(z, h) - self.rho_full(z, -h)) / (2 * h)


def _as_real_fn(r) -> Callable:
    if isinstance(r, Domain):
        cons = r.constraints
        if not cons:
            raise DegenerateGradient("domain has no implicit constraint", op="normal_form")

        def fn(z, w):
            vals = [np.real(evaluate(c, {"z": z, "w": w}, strict=False)) for c in cons]
            return np.max(np.stack(np.broadcast_arrays(*vals)), axis=0)

        return fn
    if isinstance(r, Expr.__args__):
        return lambda z, w: np.real(evaluate(r, {"z": z, "w": w}, strict=False))
    return r


def complex_gradient(r: Callable, p: Pair, h: float = 1e-6) -> np.ndarray:
    """``(dr/dzb, dr/dwb)`` of a real function at p."""
    z0, w0 = complex(p[0]), complex(p[1])
    out = []
    for dz, dw in ((1, 0), (0, 1)):
        dx = (r(z0 + h * dz, w0 + h * dw) - r(z0 - h * dz, w0 - h * dw)) / (2 * h)
        dy = (r(z0 + 1j * h * dz, w0 + 1j * h * dw) - r(z0 - 1j * h * dz, w0 - 1j * h * dw)) / (2 * h)
        out.append(0.5 * (float(np.real(dx)) + 1j * float(np.real(dy))))
    return np.array(out)


def _gauge(v: np.ndarray) -> np.ndarray:
    k = int(np.argmax(np.abs(v)))
    return v * (abs(v[k]) / v[k])


def normal_form(r, p: Pair, rho=None, *, span: float = 1.0, steps: int = 60) -> NormalForm:
    """Translate p to 0 and rotate so the inner normal is the ``Im w`` axis.

    ``r`` is a real expression in (z, w), a callable or a :class:`Domain`
    (the domain is ``r < 0``). The boundary equation is solved for
    ``v = Im w'`` by bisection on ``[-span, span]``; an explicit ``rho`` can
    be supplied and is then used for evaluation.
    """
    fn = _as_real_fn(r)
    p = (complex(p[0]), complex(p[1]))
    r0 = float(np.real(fn(p[0], p[1])))
    if abs(r0) > 1e-10:
        raise SolveFailure(f"p is not on the boundary: r(p) = {r0:.3e}", op="normal_form")
    grad = complex_gradient(fn, p)
    gn = float(np.linalg.norm(grad))
    # central differences with h = 1e-6 carry noise near 1e-10
    if gn < 1e-8:
        raise DegenerateGradient(f"|grad r(p)| = {gn:.3e}", op="normal_form")
    N = grad / gn
    e_w = 1j * N
    e_z = _gauge(np.array([np.conj(e_w[1]), -np.conj(e_w[0])]))
    U = np.stack([e_z, e_w], axis=1)

    def solve(z, u):
        z = np.asarray(z, dtype=complex)
        u = np.asarray(u, dtype=float)
        z, u = np.broadcast_arrays(z, u)

        def r_at(v):
            x0 = p[0] + U[0, 0] * z + U[0, 1] * (u + 1j * v)
            x1 = p[1] + U[1, 0] * z + U[1, 1] * (u + 1j * v)
            return np.real(fn(x0, x1))

        lo = np.full(z.shape, -span)
        hi = np.full(z.shape, span)
        with np.errstate(all="ignore"):
            if not (np.all(r_at(lo) > 0) and np.all(r_at(hi) < 0)):
                raise SolveFailure("boundary not bracketed on the trust region", op="normal_form")
            for _ in range(steps):
                mid = 0.5 * (lo + hi)
                outside = r_at(mid) >= 0
                lo = np.where(outside, mid, lo)
                hi = np.where(outside, hi, mid)
        return 0.5 * (lo + hi)

    solved = Rho(solve)
    full = Rho.of(rho) if rho is not None else solved
    return NormalForm(full, p, U, solved)


def normal_form_of_rho(rho) -> NormalForm:
    """Normal form for a domain already written as ``Im w > rho``."""
    return NormalForm(Rho.of(rho), (0j, 0j), np.eye(2, dtype=complex))


# -- orders of vanishing --------------------------------------------------------------

@dataclass(frozen=True)
class AtLeast:
    """Sentinel for an order of vanishing beyond the tested maximum."""

    bound: int

    def __str__(self) -> str:
        return f">={self.bound}"


def ladder(eps0: float = 0.25, n: int = 36) -> np.ndarray:
    return eps0 * 0.5 ** np.arange(n)


def order_from_logs(logs: np.ndarray, max_order: int, fit_tol: float = 0.1, window: int = 4):
    """Order from ``log|f|`` sampled on a halving ladder (last axis).

    Returns an int, an :class:`AtLeast` sentinel, or None when the values
    reach the noise floor before any conclusion.
    """
    logs = np.asarray(logs, dtype=float)
    finite = np.isfinite(logs) & (logs > np.log(1e-300))
    n = int(np.argmin(finite)) if not finite.all() else len(logs)
    slopes = -np.diff(logs[:n]) / LN2
    for i in range(len(slopes)):
        s = slopes[i]
        if s > max_order + 0.5:
            return AtLeast(max_order)
        if i + window <= len(slopes):
            seg = slopes[i: i + window]
            k = int(round(float(np.mean(seg))))
            if k >= 1 and np.all(np.abs(seg - k) <= fit_tol):
                return k
    return None


def vanishing_order(f: Callable, max_order: int = 12, *, phases: Sequence[complex] = (1.0,),
                    eps0: float = 0.25, n: int = 36):
    """Order of vanishing of ``f`` at 0, the minimum over sampled directions.

    ``f`` is called on a complex array ``eps * phase``.
    """
    eps = ladder(eps0, n)
    best = None
    for ph in phases:
        with np.errstate(all="ignore"):
            vals = np.asarray(f(eps * ph))
            logs = np.log(np.abs(vals))
        k = order_from_logs(logs, max_order)
        if k is None:
            if np.all(np.isfinite(logs) & (logs > np.log(1e-300))):
                raise Inconclusive("log-log slope never settles on the ladder", op="vanishing_order")
            raise NoiseFloor("values underflow before the slope settles", op="vanishing_order")
        best = k if best is None else _min_order(best, k)
    return best


def _min_order(a, b):
    if isinstance(a, AtLeast):
        return b
    if isinstance(b, AtLeast):
        return a
    return min(a, b)


# -- D'Angelo type ------------------------------------------------------------------------

class TypeKind(str, enum.Enum):
    FINITE = "Finite"
    INFINITE_TYPE_I = "InfiniteTypeI"
    INFINITE_TYPE_II_SUSPECT = "InfiniteTypeII_suspect"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class Disc:
    """``psi(xi) = (sum a_k xi^k, sum b_k xi^k)``, coefficient k at index k-1."""

    a: tuple[complex, ...]
    b: tuple[complex, ...]

    @property
    def order(self) -> int:
        return min(k + 1 for part in (self.a, self.b) for k, c in enumerate(part) if c != 0)

    def __call__(self, xi):
        xi = np.asarray(xi, dtype=complex)
        za = sum(c * xi ** (k + 1) for k, c in enumerate(self.a) if c != 0)
        wb = sum(c * xi ** (k + 1) for k, c in enumerate(self.b) if c != 0)
        return za + 0 * xi, wb + 0 * xi

    def as_lists(self):
        return {"a": [[c.real, c.imag] for c in self.a], "b": [[c.real, c.imag] for c in self.b]}


@dataclass(frozen=True)
class DiscSearch:
    degree: int = 3
    step: float = 0.25
    modulus: float = 2.0
    max_order: int = 12
    #: directions at which each disc is probed (the order is the minimum)
    phases: tuple[complex, ...] = tuple(np.exp(2j * np.pi * (np.arange(6) + 0.137) / 6))

    def coefficients(self) -> np.ndarray:
        m = int(np.floor(self.modulus / self.step))
        t = self.step * np.arange(-m, m + 1)
        c = (t[:, None] + 1j * t[None, :]).ravel()
        c = c[(np.abs(c) <= self.modulus + 1e-12) & (c != 0)]
        return c[np.lexsort((c.imag, c.real))]

    def discs(self) -> list[Disc]:
        """Trivial disc first, then monomial discs, then two-term lattice discs.

        Two-term discs are normalised so their lowest term has coefficient 1;
        rescaling xi makes this no loss of generality for the ratio.
        """
        d = self.degree
        zero = (0j,) * d

        def put(slot: int, k: int, c: complex, base=None):
            a, b = list(base[0] if base else zero), list(base[1] if base else zero)
            (a if slot == 0 else b)[k - 1] = c
            return a, b

        out = [Disc((1 + 0j,) + zero[1:], zero)]
        cs = self.coefficients()
        for m in range(1, d + 1):
            for c in cs:
                a, b = put(1, m, c, put(0, 1, 1 + 0j))
                out.append(Disc(tuple(a), tuple(b)))
                a, b = put(0, m, c, put(1, 1, 1 + 0j))
                out.append(Disc(tuple(a), tuple(b)))
        slots = [(s, k) for s in (0, 1) for k in range(1, d + 1)]
        for (s1, k1), (s2, k2) in itertools.permutations(slots, 2):
            if k2 < k1:
                continue
            for c in cs:
                a, b = put(s2, k2, c, put(s1, k1, 1 + 0j))
                out.append(Disc(tuple(a), tuple(b)))
        seen, uniq = set(), []
        for disc in out:
            if disc not in seen:
                seen.add(disc)
                uniq.append(disc)
        return uniq


@dataclass
class TypeReport:
    kind: TypeKind
    t_estimate: float
    m_z_samples: list = field(default_factory=list)
    disc_witness: Disc | None = None
    exhausted: bool = True
    discs_tested: int = 0

    def to_dict(self) -> dict:
        t = self.t_estimate
        return {
            "kind": self.kind.value,
            "t_estimate": t if np.isfinite(t) else "inf",
            "m_z_samples": [[float(x) for x in s] for s in self.m_z_samples],
            "disc_witness": self.disc_witness.as_lists() if self.disc_witness else None,
            "exhausted": self.exhausted,
            "discs_tested": self.discs_tested,
        }


def _disc_orders(nf: NormalForm, discs: Sequence[Disc], search: DiscSearch, eps0=0.25, n=36, chunk=512,
                 noise: float = 1e-13):
    """Order of vanishing of ``r(psi) = rho(a, Re b) - Im b`` for each disc."""
    eps = ladder(eps0, n)
    phases = np.asarray(search.phases)
    xi = phases[:, None] * eps[None, :]  # (P, L)
    orders = []
    d = search.degree
    powers = np.stack([xi ** (k + 1) for k in range(d)])  # (d, P, L)
    for s in range(0, len(discs), chunk):
        block = discs[s: s + chunk]
        A = np.array([disc.a for disc in block])  # (B, d)
        Bc = np.array([disc.b for disc in block])
        za = np.tensordot(A, powers, axes=(1, 0))  # (B, P, L)
        wb = np.tensordot(Bc, powers, axes=(1, 0))
        with np.errstate(all="ignore"):
            has_w = np.any(Bc != 0, axis=1)[:, None, None]
            rho = nf.rho_full(za, np.real(wb))
            val = rho - np.imag(wb)
            # values at rounding level are cancellation noise, not data
            val = np.where(np.abs(val) < noise, 0.0, val)
            # along discs with no w part use log space: rho may underflow
            logs = np.where(has_w, np.log(np.abs(val)), nf.rho_full.log(za, np.zeros(za.shape)))
        for b in range(len(block)):
            best = None
            for pidx in range(len(phases)):
                row = logs[b, pidx]
                k = order_from_logs(row, search.max_order)
                if k is None and not np.isfinite(row[0]):
                    # zero from the first rung on: r vanishes along the disc
                    k = AtLeast(search.max_order)
                if k is None:
                    continue
                best = k if best is None else _min_order(best, k)
            orders.append(best)
    return orders


def one_sided(nf: NormalForm, n_rays: int = 12) -> bool:
    """True if ``rho(z, zb, 0) > 0`` on sampled rays (checked in log space)."""
    z = (z_ladder(0.2, 6)[:, None] * np.exp(2j * np.pi * (np.arange(n_rays) + 0.5) / n_rays)[None, :]).ravel()
    with np.errstate(all="ignore"):
        direct = nf.rho0(z)
        logs = nf.log_rho0(z)
    return bool(np.all(direct >= 0) and np.all(np.isfinite(logs)))


def _ratio(order, disc: Disc) -> float:
    if order is None:
        return float("nan")
    if isinstance(order, AtLeast):
        return float("inf")
    return order / disc.order


def dangelo_type(nf: NormalForm, search: DiscSearch | None = None, *, classify_infinite: bool = True) -> TypeReport:
    """Lower-bound estimate of the D'Angelo type by searching analytic discs."""
    search = search or DiscSearch()
    discs = search.discs()
    orders = _disc_orders(nf, discs, search)
    ratios = np.array([_ratio(o, d) for o, d in zip(orders, discs)])
    valid = ~np.isnan(ratios)
    if not valid[0]:
        return TypeReport(TypeKind.INCONCLUSIVE, float("nan"), discs_tested=len(discs))
    best = int(np.argmax(np.where(valid, ratios, -np.inf)))
    t = float(ratios[best])
    witness = discs[best]
    if np.isinf(t):
        report = TypeReport(TypeKind.INCONCLUSIVE, float("inf"), disc_witness=witness, discs_tested=len(discs))
        if classify_infinite and one_sided(nf):
            try:
                kind, samples = type_I_classifier(nf.log_rho0)
            except NoiseFloor:
                return report
            report.kind = kind
            report.m_z_samples = samples
        return report
    # re-measure along the witness with a shifted ladder and other directions
    check = DiscSearch(search.degree, search.step, search.modulus, search.max_order,
                       tuple(np.exp(2j * np.pi * (np.arange(5) + 0.61) / 5)))
    again = _disc_orders(nf, [witness], check, eps0=0.2)[0]
    if _ratio(again, witness) != t:
        return TypeReport(TypeKind.INCONCLUSIVE, t, disc_witness=witness, discs_tested=len(discs))
    return TypeReport(TypeKind.FINITE, t, disc_witness=witness, discs_tested=len(discs))


# -- infinite type I ---------------------------------------------------------------------

A_MODULI = (0.9, 0.7, 0.5)
A_PHASES = tuple(np.exp(2j * np.pi * np.arange(4) / 4))


def z_ladder(z0: float = 0.2, n: int = 6) -> np.ndarray:
    return z0 * 0.5 ** np.arange(n)


def m_z_table(log_rho0: Callable, a_values: Sequence[complex], z_values: Sequence[complex]) -> np.ndarray:
    """``m_z = log(rho(a z)/rho(z)) / log|a|`` for all pairs, shape (len(a), len(z))."""
    a = np.asarray(a_values, dtype=complex)[:, None]
    z = np.asarray(z_values, dtype=complex)[None, :]
    with np.errstate(all="ignore"):
        num = np.asarray(log_rho0(a * z)) - np.asarray(log_rho0(z + 0 * a))
        m = num / np.log(np.abs(a))
    if not np.all(np.isfinite(m)):
        raise NoiseFloor("log rho is not finite on the sample ladder", op="type_I_classifier")
    return m


def type_I_classifier(log_rho0: Callable, a_ladder: Sequence[complex] | None = None,
                      z_ladder_: Sequence[float] | None = None, z_phases: Sequence[complex] = (1.0, 1j, -1.0),
                      tol_mz: float = DEFAULT_TOLERANCES["mz"]):
    """Infinite type I iff min-over-a ``m_z`` at least doubles as ``|z|`` halves.

    ``log_rho0`` maps complex z to ``log rho(z, zb, 0)``. Returns the kind
    and samples ``(|z|, min_a m_z)``.
    """
    if a_ladder is None:
        a_ladder = [r * ph for r in A_MODULI for ph in A_PHASES]
    zs = np.asarray(z_ladder(0.2, 6) if z_ladder_ is None else z_ladder_, dtype=float)
    mins = []
    for r in zs:
        m = m_z_table(log_rho0, a_ladder, r * np.asarray(z_phases))
        mins.append(float(m.min()))
    samples = [(float(r), m) for r, m in zip(zs, mins)]
    ratios = np.array(mins[1:]) / np.array(mins[:-1])
    growing = len(ratios) > 0 and bool(np.all(ratios >= 2 * (1 - tol_mz))) and mins[0] > 0
    kind = TypeKind.INFINITE_TYPE_I if growing else TypeKind.INFINITE_TYPE_II_SUSPECT
    return kind, samples


def m_z_exact_exp(z_abs: float, a_abs: float, power: int = 2) -> float:
    """Closed form of ``m_z`` for ``rho = exp(-1/|z|^power)``."""
    return (z_abs ** -power) * (a_abs ** -power - 1) / np.log(1 / a_abs)


# -- collapse ------------------------------------------------------------------------------

@dataclass(frozen=True)
class CollapseResult:
    js: tuple[int, ...]
    log_sup: tuple[float, ...]

    @property
    def series(self) -> tuple[float, ...]:
        return tuple(float(np.exp(x)) for x in self.log_sup)

    @property
    def sup(self) -> float:
        return self.series[-1]


def unit_grid(n: int = 11, radius: float = 1.0) -> np.ndarray:
    pts = disc_lattice(n, radius)
    Z, W = np.meshgrid(pts, pts, indexing="ij")
    return np.stack([Z.ravel(), W.ravel()], axis=1)


def collapse_check(log_rho0: Callable, b11_seq, b12_seq, b22_seq, grid: np.ndarray, js=None) -> CollapseResult:
    """Sup over the grid of ``|rho(b11 z + b12 w) / b22|`` for each j, in log space."""
    b11, b12, b22 = (np.asarray(s, dtype=complex) for s in (b11_seq, b12_seq, b22_seq))
    js = tuple(range(1, len(b11) + 1)) if js is None else tuple(js)
    out = []
    for k in range(len(b11)):
        arg = b11[k] * grid[:, 0] + b12[k] * grid[:, 1]
        with np.errstate(all="ignore"):
            lg = np.asarray(log_rho0(arg), dtype=float) - np.log(abs(b22[k]))
        if np.any(np.isnan(lg)):
            raise NoiseFloor("log rho undefined on the collapse grid", op="collapse_check")
        out.append(float(np.max(lg)))
    return CollapseResult(js, tuple(out))


# -- limit boundary (finite type) ----------------------------------------------------------

@dataclass(frozen=True)
class LimitFit:
    """Limit domain ``Im(n1 z' + n2 w' + e) > rho_k(c z' + d w')``.

    ``h = b21/b22`` is the normal-direction ratio when ``b22`` stays away
    from 0 (None otherwise).
    """

    h: complex | None
    c: complex
    d: complex
    n: Pair
    e: complex
    k: int
    residual: float
    beta: tuple[float, ...] = ()

    def to_dict(self) -> dict:
        cx = lambda v: None if v is None else [float(np.real(v)), float(np.imag(v))]  # noqa: E731
        return {"h": cx(self.h), "c": cx(self.c), "d": cx(self.d), "n": [cx(self.n[0]), cx(self.n[1])],
                "e": cx(self.e), "k": self.k, "residual": self.residual}


def _aitken(x: np.ndarray):
    if len(x) < 3:
        return x[-1]
    x0, x1, x2 = x[-3], x[-2], x[-1]
    den = x2 - 2 * x1 + x0
    if abs(den) < 1e-14 * max(1.0, abs(x2)):
        return x2
    return x2 - (x2 - x1) ** 2 / den


def homogeneous_part(rho: Rho, k: int, t: float = 1e-3) -> Callable:
    """``rho_k(Z) ~ rho(t Z, 0) / t^k`` for small t."""
    return lambda Z: rho(t * np.asarray(Z, dtype=complex), 0.0) / t**k


def limit_boundary_fit(family: MapFamily, q: Pair, nf: NormalForm, k: int, j_range: Sequence[int],
                       tol=None, n_samples: int = 400, seed: int = 0) -> LimitFit:
    """Fit the limit boundary of Frankel-type rescalings at a finite-type point.

    With ``b = U^H J phi_j(q)`` (normal coordinates), ``beta = |(b21, b22)|``
    must go to 0; the normal functional ``n = (b21, b22)/beta``, the
    tangential coefficients ``(c, d) = (b11, b12)/beta^(1/k)`` and the offset
    ``e = w'(phi_j(q))/beta`` must converge.
    """
    tol = {**DEFAULT_TOLERANCES, **(tol or {})}
    js = list(j_range)
    U = nf.frame
    rows = []
    for j in js:
        J = jacobian(family, j, q).matrix
        b = U.conj().T @ J
        f, g = family(j, complex(q[0]), complex(q[1]))
        cz, cw = nf.to_normal(complex(f), complex(g))
        beta = float(np.hypot(abs(b[1, 0]), abs(b[1, 1])))
        rows.append((b, complex(cz), complex(cw), beta))
    betas = np.array([r[3] for r in rows])
    if betas[-1] > 1e-2 * betas[0] or not np.all(np.diff(betas) < 0):
        raise NonConvergentRatio("normal component of J phi_j(q) does not tend to 0", op="limit_boundary_fit")
    feats = []
    for b, cz, cw, beta in rows:
        s = beta ** (1.0 / k)
        feats.append([b[1, 0] / beta, b[1, 1] / beta, b[0, 0] / s, b[0, 1] / s, cw / beta, cz / s])
    feats = np.array(feats)
    scale = np.maximum(1.0, np.abs(feats[-1]))
    steps = np.abs(np.diff(feats, axis=0)) / scale
    if len(steps) >= 2 and (np.any(steps[-1] > tol["ratio_cauchy"]) or np.any(steps[-1] > steps[-2] * 1.0001 + 1e-12)):
        raise NonConvergentRatio("scaled Jacobian ratios fail the Cauchy test", op="limit_boundary_fit")
    lim = np.array([_aitken(feats[:, i]) for i in range(feats.shape[1])])
    n1, n2, c, d, e, _ = lim
    b, cz, cw, beta = rows[-1]
    h = b[1, 0] / b[1, 1] if abs(b[1, 1]) > 1e-8 * beta else None

    # sample the boundary of A_j(Omega) at the last j
    rng = np.random.default_rng(seed)
    s = beta ** (1.0 / k)
    rad = np.sqrt(rng.random(n_samples))
    zp = cz + s * rad * np.exp(2j * np.pi * rng.random(n_samples))
    up = np.real(cw) + beta * (2 * rng.random(n_samples) - 1)
    vp = nf.rho_full(zp, up)
    x0, x1 = nf.from_normal(zp, up + 1j * vp)
    f, g = family(js[-1], complex(q[0]), complex(q[1]))
    Jinv = np.linalg.inv(jacobian(family, js[-1], q).matrix)
    d0, d1 = x0 - complex(f), x1 - complex(g)
    zeta1 = Jinv[0, 0] * d0 + Jinv[0, 1] * d1
    zeta2 = Jinv[1, 0] * d0 + Jinv[1, 1] * d1
    rho_k = homogeneous_part(nf.rho_full, k)
    lhs = np.imag(n1 * zeta1 + n2 * zeta2 + e)
    rhs = rho_k(c * zeta1 + d * zeta2)
    residual = float(np.max(np.abs(lhs - rhs)))
    h = None if h is None else complex(h)
    return LimitFit(h, complex(c), complex(d), (complex(n1), complex(n2)), complex(e), k, residual,
                    tuple(float(x) for x in betas))
