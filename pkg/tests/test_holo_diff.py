from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from holoscale.errors import DegenerateJacobian, Inconclusive, InsufficientGrid
from holoscale.holo_diff import (
    Case,
    EigenField,
    Jacobian2,
    classify_case,
    compact_grid,
    cr_residual,
    det_ratio_bounds,
    eigenpair,
    eigenvalues,
    jacobian,
    jacobian_fd,
    jacobian_field,
    op_norm,
    tensor_grid,
)

from .conftest import BIDISC_G, load, make_family

JS = range(1, 13)


def lex_key(x):
    return (abs(x), x.real, x.imag)


# -- Jacobians ----------------------------------------------------------------------

def test_identity_jacobian():
    fam = make_family("z", "w")
    for p in [(0, 0), (0.3 + 0.1j, -0.2j)]:
        assert np.array_equal(jacobian(fam, 4, p).matrix, np.eye(2))


def test_bidisc_jacobian_at_origin():
    fam = make_family("z", BIDISC_G, alpha=(0.5,))
    np.testing.assert_allclose(jacobian(fam, 1, (0, 0)).matrix, [[1, 0], [0, 0.75]], atol=1e-15)


def test_cex1_jacobian_at_origin():
    cfg = load("cex1")
    fam = replace(cfg.family, schedule=(0.99,))
    m = jacobian(fam, 1, (0, 0)).matrix
    assert m[0, 0] == pytest.approx(1 - 0.99**2, rel=1e-12)
    assert m[1, 1] == pytest.approx((1 - 0.99**2) ** 0.25, rel=1e-12)
    assert abs(m[0, 1]) < 1e-15 and abs(m[1, 0]) < 1e-15


@pytest.mark.parametrize("name", ["bidisc", "ball", "quartic", "cex1", "cex2"])
def test_dual_matches_finite_differences(name):
    cfg = load(name)
    rng = np.random.default_rng(3)
    for j in (2, 6):
        for _ in range(5):
            p = tuple(complex(cfg.q[k]) + 0.2 * (rng.random() - 0.5 + 1j * (rng.random() - 0.5)) for k in (0, 1))
            exact = jacobian(cfg.family, j, p).matrix
            fd = jacobian_fd(cfg.family, j, p).matrix
            assert np.max(np.abs(exact - fd)) <= 1e-7 * max(1.0, np.max(np.abs(exact)))


def test_jacobian_field_matches_pointwise():
    cfg = load("cex2")
    grid = compact_grid(cfg.q, 0.3, 3, 2, seed=1)
    _, _, a11, a12, a21, a22 = jacobian_field(cfg.family, 5, grid[:, 0], grid[:, 1])
    for k in range(0, len(grid), 37):
        J = jacobian(cfg.family, 5, tuple(grid[k]))
        np.testing.assert_allclose([a11[k], a12[k], a21[k], a22[k]], [J.a11, J.a12, J.a21, J.a22], rtol=1e-14)


def test_degenerate_inverse_raises():
    with pytest.raises(DegenerateJacobian):
        Jacobian2(1, 2, 2, 4).inverse()


# -- eigenvalues --------------------------------------------------------------------

def test_eigenpair_examples():
    ep = eigenpair(Jacobian2(1, 0, 0, 1))
    assert ep.lambda1 == ep.lambda2 == 1 and ep.degenerate
    ep = eigenpair(Jacobian2(1, 0, 0, 0.75))
    assert (ep.lambda1, ep.lambda2) == (1, 0.75) and not ep.degenerate
    ep = eigenpair(Jacobian2(0, 1, -1, 0))
    assert ep.lambda1 == pytest.approx(1j) and ep.lambda2 == pytest.approx(-1j)


cplx = st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False)


@settings(max_examples=300, deadline=None)
@given(cplx, cplx, cplx, cplx)
def test_vieta_and_order(a, b, c, d):
    J = Jacobian2(a, b, c, d)
    ep = eigenpair(J)
    scale = max(1.0, abs(a) + abs(b) + abs(c) + abs(d)) ** 2
    assert abs(ep.lambda1 * ep.lambda2 - J.det) <= 1e-10 * scale
    assert abs(ep.lambda1 + ep.lambda2 - J.trace) <= 1e-10 * scale ** 0.5
    k1, k2 = lex_key(ep.lambda1), lex_key(ep.lambda2)
    tol = 1e-12 * max(abs(ep.lambda1), 1e-300)
    assert k1[0] >= k2[0] - tol


def test_vieta_on_corpus_fields(corpus):
    for name, cfg in corpus.items():
        grid = compact_grid(cfg.q, cfg.radius, 3, 2, seed=0)
        for j in (3, 9):
            _, _, a11, a12, a21, a22 = jacobian_field(cfg.family, j, grid[:, 0], grid[:, 1])
            t, d = a11 + a22, a11 * a22 - a12 * a21
            l1, l2, _ = eigenvalues(t, d)
            # characteristic equation pointwise
            for lam in (l1, l2):
                assert np.max(np.abs(lam * lam - t * lam + d)) <= 1e-10 * max(1.0, np.max(np.abs(t)) ** 2), name
            assert np.all(np.abs(l1) >= np.abs(l2) * (1 - 1e-12))


def test_similarity_invariance():
    rng = np.random.default_rng(5)
    for _ in range(50):
        m = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        q, _ = np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
        e1 = eigenpair(Jacobian2.from_matrix(m))
        e2 = eigenpair(Jacobian2.from_matrix(q.conj().T @ m @ q))
        assert abs(e1.lambda1 * e1.lambda2 - e2.lambda1 * e2.lambda2) < 1e-12 * np.abs(m).max() ** 2
        assert abs(e1.lambda1 + e1.lambda2 - e2.lambda1 - e2.lambda2) < 1e-12 * np.abs(m).max()


def test_op_norm_examples():
    assert op_norm(Jacobian2(1, 0, 0, 1)) == pytest.approx(1, abs=1e-15)
    assert op_norm(Jacobian2(3, 0, 0, 4j)) == pytest.approx(4, abs=1e-14)
    assert op_norm(Jacobian2(1, 1, 0, 1)) == pytest.approx(np.sqrt((3 + np.sqrt(5)) / 2), abs=1e-12)


def test_op_norm_matches_svd():
    rng = np.random.default_rng(9)
    for _ in range(200):
        m = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        assert op_norm(m) == pytest.approx(np.linalg.svd(m, compute_uv=False)[0], rel=1e-12)


# -- holomorphy residuals -----------------------------------------------------------

def test_constant_field_residual_is_zero():
    pts = tensor_grid(5, 0.5)
    fld = EigenField.of_function(lambda z, w: np.full(np.shape(z), 2 - 1j), pts)
    assert cr_residual(fld) < 1e-12


def test_bidisc_second_eigenvalue_is_holomorphic():
    fam = make_family("z", BIDISC_G, alpha=(0.5,))
    fld = EigenField.of_family(fam, 1, tensor_grid(9, 0.5))
    assert cr_residual(fld, which=(1,)) < 1e-6


def test_real_part_control():
    fld = EigenField.of_function(lambda z, w: np.real(z) + 0j, tensor_grid(5, 0.5))
    assert cr_residual(fld) == pytest.approx(0.5, abs=1e-6)


def test_fully_masked_grid_is_insufficient():
    fam = make_family("z", "w")
    with pytest.raises(InsufficientGrid):
        cr_residual(EigenField.of_family(fam, 1, tensor_grid(5, 0.5)))


@pytest.mark.parametrize("name", ["bidisc", "ball", "quartic", "cex1", "cex2"])
def test_corpus_eigenfields_holomorphic(name):
    cfg = load(name)
    grid = tensor_grid(7, 0.2, cfg.q)
    fld = EigenField.of_family(cfg.family, 4, grid)
    assert cr_residual(fld) < 1e-5


# -- case dichotomy -----------------------------------------------------------------

def test_classify_cases(corpus):
    assert classify_case(corpus["identity"].family, (0, 0), JS) == Case.COMPACT
    assert classify_case(corpus["bidisc"].family, (0, 0), JS) == Case.ACCUMULATION_VARIETY
    assert classify_case(corpus["ball"].family, (0, 0), JS) == Case.ACCUMULATION_POINT
    assert classify_case(corpus["quartic"].family, corpus["quartic"].q, JS) == Case.ACCUMULATION_POINT


def test_classify_oscillating_is_inconclusive():
    fam = make_family("z", "w*(1 - a)*(2 + (-1)^j)")
    with pytest.raises(Inconclusive):
        classify_case(fam, (0, 0), JS)


# -- determinant ratios -------------------------------------------------------------

def test_det_ratio_identity():
    b = det_ratio_bounds(make_family("z", "w"), (0, 0), compact_grid((0, 0), 0.5), JS)
    assert (b.lower, b.upper) == (1.0, 1.0) and not b.violation_suspected


def test_det_ratio_bidisc_closed_form():
    fam = make_family("z", BIDISC_G)
    grid = compact_grid((0, 0), 0.5, seed=2)
    b = det_ratio_bounds(fam, (0, 0), grid, JS)
    assert 1 / 1.5**2 - 1e-12 <= b.lower and b.upper <= 4 + 1e-9
    for j, lo, hi in b.per_j:
        a = 1 - 2.0**-j
        ref = np.abs(1 - a * grid[:, 1]) ** -2
        assert lo == pytest.approx(ref.min(), rel=1e-12) and hi == pytest.approx(ref.max(), rel=1e-12)
