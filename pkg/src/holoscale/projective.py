"""Point clouds in CP^2 under the embedding (z, w) -> [1, z, w].

Distances are Fubini-Study geodesic distances between unit representatives;
set distances are Hausdorff distances between finite samples.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.stats import qmc

from .dsl.config import DEFAULT_TOLERANCES
from .errors import EmptyCloud, NoInteriorFound, NonFinite

Pair = tuple[complex, complex]
Predicate = Callable[[np.ndarray, np.ndarray], np.ndarray]


def embed(p: Pair) -> np.ndarray:
    return embed_many(np.asarray([p[0]]), np.asarray([p[1]]))[0]


def embed_many(z, w) -> np.ndarray:
    z = np.asarray(z, dtype=complex).ravel()
    w = np.asarray(w, dtype=complex).ravel()
    if not (np.all(np.isfinite(z)) and np.all(np.isfinite(w))):
        raise NonFinite("cannot embed non-finite coordinates", op="embed")
    v = np.stack([np.ones_like(z), z, w], axis=1)
    # scale by the largest entry first so huge coordinates do not overflow
    m = np.max(np.abs(v), axis=1, keepdims=True)
    v = v / m
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def _half_angle(P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    """``2 atan2(|q - p'|, |q + p'|)`` with p' the phase of p aligned to q.

    Accurate at every angle and exactly 0 when the rows agree.
    """
    ip = np.einsum("ij,ij->i", P.conj(), Q)
    mag = np.abs(ip)
    ph = np.where(mag > 0, ip / np.where(mag > 0, mag, 1.0), 1.0)
    Pa = ph[:, None] * P
    return 2 * np.arctan2(np.linalg.norm(Q - Pa, axis=1), np.linalg.norm(Q + Pa, axis=1))


def _pair_dist(P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    """Row-wise geodesic distance ``arccos |<p, q>|``; symmetric bit for bit."""
    return 0.5 * (_half_angle(P, Q) + _half_angle(Q, P))


def fs_dist(p, q):
    """Fubini-Study distance between unit triples.

    Stacked inputs of shape (N, 3) give an array of N distances.
    """
    P = np.asarray(p, dtype=complex)
    Q = np.asarray(q, dtype=complex)
    if P.ndim == 2 or Q.ndim == 2:
        P, Q = np.broadcast_arrays(np.atleast_2d(P), np.atleast_2d(Q))
        return _pair_dist(P, Q)
    return float(_pair_dist(P.reshape(1, -1), Q.reshape(1, -1))[0])


class Label(str, enum.Enum):
    INTERIOR = "interior"
    BOUNDARY = "boundary"


@dataclass
class CloudCP2:
    points: np.ndarray            # (N, 3) unit triples
    labels: np.ndarray            # (N,) bool, True = interior
    seed: int = 0
    affine: np.ndarray | None = field(default=None, repr=False)  # (N, 2) source coordinates

    @classmethod
    def from_affine(cls, z, w, labels, seed: int = 0) -> "CloudCP2":
        pts = embed_many(z, w)
        aff = np.stack([np.asarray(z, dtype=complex).ravel(), np.asarray(w, dtype=complex).ravel()], axis=1)
        return cls(pts, np.asarray(labels, dtype=bool), seed, aff)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def interior(self) -> np.ndarray:
        return self.points[self.labels]

    @property
    def boundary(self) -> np.ndarray:
        return self.points[~self.labels]

    def to_text(self) -> str:
        """One line per point: six real coordinates then the label."""
        lines = ["# re0 im0 re1 im1 re2 im2 label"]
        for p, lab in zip(self.points, self.labels):
            nums = " ".join(repr(float(x)) for c in p for x in (c.real, c.imag))
            lines.append(f"{nums} {'interior' if lab else 'boundary'}")
        return "\n".join(lines) + "\n"


def _directed(A: np.ndarray, B: np.ndarray, chunk: int = 2048) -> float:
    """``max_a min_b fs_dist(a, b)``."""
    worst = 0.0
    for s in range(0, len(A), chunk):
        a = A[s: s + chunk]
        g = np.abs(a.conj() @ B.T)
        nearest = np.argmax(g, axis=1)
        d = _pair_dist(a, B[nearest])
        worst = max(worst, float(d.max()))
    return worst


def hausdorff(A, B) -> float:
    PA = A.points if isinstance(A, CloudCP2) else np.asarray(A, dtype=complex)
    PB = B.points if isinstance(B, CloudCP2) else np.asarray(B, dtype=complex)
    if len(PA) == 0 or len(PB) == 0:
        raise EmptyCloud("Hausdorff distance needs nonempty clouds", op="hausdorff")
    return max(_directed(PA, PB), _directed(PB, PA))


# -- sampling -------------------------------------------------------------------

@dataclass(frozen=True)
class Region:
    """Box ``center + [-half, half]^4`` in real coordinates of C^2."""

    center: Pair = (0j, 0j)
    half: float = 1.0

    def scale(self, u: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        x = (2 * u - 1) * self.half
        z = complex(self.center[0]) + x[:, 0] + 1j * x[:, 1]
        w = complex(self.center[1]) + x[:, 2] + 1j * x[:, 3]
        return z, w


def sample_domain(predicate: Predicate, region: Region, n: int = 2000, seed: int = 7,
                  n_boundary: int = 500, steps: int = 60, max_probes: int | None = None) -> CloudCP2:
    """Halton interior sample plus boundary points found by bisection.

    Boundary points come from segments joining a random interior hit to a
    random exterior probe; the returned point is the inner end of the final
    bracket, so it lies in the closure of the domain.
    """
    max_probes = max_probes or 64 * max(n, 1)
    halton = qmc.Halton(d=4, scramble=True, seed=seed)
    zin, win, zout, wout = [], [], [], []
    have, probes = 0, 0
    batch = max(256, 2 * n)
    while have < n and probes < max_probes:
        z, w = region.scale(halton.random(batch))
        inside = np.asarray(predicate(z, w), dtype=bool)
        zin.append(z[inside])
        win.append(w[inside])
        zout.append(z[~inside])
        wout.append(w[~inside])
        have += int(inside.sum())
        probes += batch
    zi, wi = np.concatenate(zin)[:n], np.concatenate(win)[:n]
    zo, wo = np.concatenate(zout), np.concatenate(wout)
    if len(zi) == 0:
        raise NoInteriorFound(f"no interior point among {probes} probes", op="sample_domain")
    zb = np.empty(0, dtype=complex)
    wb = np.empty(0, dtype=complex)
    if n_boundary > 0 and len(zo) > 0:
        rng = np.random.default_rng(seed)
        ii = rng.integers(0, len(zi), n_boundary)
        oo = rng.integers(0, len(zo), n_boundary)
        za, wa = zi[ii], wi[ii]
        zc, wc = zo[oo], wo[oo]
        lo = np.zeros(n_boundary)
        hi = np.ones(n_boundary)
        for _ in range(steps):
            mid = 0.5 * (lo + hi)
            inside = np.asarray(predicate(za + mid * (zc - za), wa + mid * (wc - wa)), dtype=bool)
            lo = np.where(inside, mid, lo)
            hi = np.where(inside, hi, mid)
        zb = za + lo * (zc - za)
        wb = wa + lo * (wc - wa)
    z = np.concatenate([zi, zb])
    w = np.concatenate([wi, wb])
    labels = np.concatenate([np.ones(len(zi), dtype=bool), np.zeros(len(zb), dtype=bool)])
    return CloudCP2.from_affine(z, w, labels, seed)


def push_forward(cloud: CloudCP2, fn: Callable) -> CloudCP2:
    """Image of a cloud (through its affine coordinates) under ``fn(z, w)``."""
    if cloud.affine is None:
        raise NonFinite("cloud has no affine coordinates to map", op="track_limit")
    z, w = fn(cloud.affine[:, 0], cloud.affine[:, 1])
    z = np.broadcast_to(np.asarray(z, dtype=complex), cloud.labels.shape)
    w = np.broadcast_to(np.asarray(w, dtype=complex), cloud.labels.shape)
    return CloudCP2.from_affine(z, w, cloud.labels, cloud.seed)


# -- limit tracking ------------------------------------------------------------------

class Verdict(str, enum.Enum):
    CAUCHY = "Cauchy"
    DIVERGENT = "Divergent"
    INCONCLUSIVE = "Inconclusive"


@dataclass
class LimitEstimate:
    js: list[int]
    step_distance: list[float]          # distance between clouds j-1 and j (nan for the first)
    target_distance: list[float] | None
    median_norm: list[float]
    verdict: Verdict
    interior_fraction: float = float("nan")

    @property
    def distance_series(self) -> list[tuple[int, float]]:
        src = self.target_distance if self.target_distance is not None else self.step_distance
        return list(zip(self.js, src))


def resolution(cloud: CloudCP2, k: int = 256, seed: int = 0) -> float:
    """Median nearest-neighbour distance on a subsample of the cloud."""
    pts = cloud.points
    rng = np.random.default_rng(seed)
    idx = rng.choice(len(pts), size=min(k, len(pts)), replace=False)
    sub = pts[idx]
    g = np.abs(sub.conj() @ pts.T)
    g[np.arange(len(idx)), idx] = -1.0
    nearest = np.argmax(g, axis=1)
    return float(np.median(_pair_dist(sub, pts[nearest])))


def interior_fraction(cloud: CloudCP2) -> float:
    """Share of interior-labelled points farther than twice the sampling
    resolution from every boundary-labelled point."""
    if not np.any(~cloud.labels) or not np.any(cloud.labels):
        return float("nan")
    r = 2 * resolution(cloud)
    inner, bd = cloud.interior, cloud.boundary
    keep = 0
    for s in range(0, len(inner), 2048):
        a = inner[s: s + 2048]
        g = np.abs(a.conj() @ bd.T)
        near = np.argmax(g, axis=1)
        keep += int(np.sum(_pair_dist(a, bd[near]) > r))
    return keep / len(inner)


def _trend_slope(y: Sequence[float]) -> float:
    y = np.asarray(y, dtype=float)
    return float(np.polyfit(np.arange(len(y), dtype=float), y, 1)[0])


def track_limit(maps: Sequence[tuple[int, Callable]], base: CloudCP2, target: CloudCP2 | None = None,
                tol=None) -> LimitEstimate:
    """Follow the images of one base sample under the scaled maps.

    ``maps`` holds ``(j, A_j)`` pairs in increasing j. The verdict is
    Cauchy when the step distances shrink and end below tol.hausdorff,
    Divergent when the sample escapes to infinity (median norm growing by
    a factor above tol.escape) or the step distances grow over the last
    half-window.
    """
    tol = {**DEFAULT_TOLERANCES, **(tol or {})}
    js, steps, tdist, med = [], [], [], []
    prev = None
    last = None
    for j, fn in maps:
        with np.errstate(all="ignore"):
            cloud = push_forward(base, fn)
        js.append(j)
        med.append(float(np.median(np.hypot(np.abs(cloud.affine[:, 0]), np.abs(cloud.affine[:, 1])))))
        steps.append(float("nan") if prev is None else hausdorff(prev, cloud))
        if target is not None:
            tdist.append(hausdorff(cloud, target))
        prev = last = cloud
    verdict = _verdict(steps, med, tol)
    frac = interior_fraction(last) if last is not None else float("nan")
    return LimitEstimate(js, steps, tdist if target is not None else None, med, verdict, frac)


def _verdict(steps: list[float], med: list[float], tol) -> Verdict:
    d = np.asarray(steps[1:], dtype=float)
    if len(d) < 3:
        return Verdict.INCONCLUSIVE
    half = d[len(d) // 2:]
    if med[-1] > tol["escape"] * med[len(med) // 2] and med[-1] > med[0]:
        return Verdict.DIVERGENT
    if np.all(np.diff(half) > 0):
        return Verdict.DIVERGENT
    if half[-1] < tol["hausdorff"] and (np.all(half <= 1e-14) or _trend_slope(np.log(np.maximum(half, 1e-300))) < 0):
        return Verdict.CAUCHY
    return Verdict.INCONCLUSIVE
