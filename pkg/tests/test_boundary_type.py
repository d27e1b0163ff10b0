import numpy as np
import pytest

from holoscale.boundary_type import (
    AtLeast,
    DiscSearch,
    Rho,
    TypeKind,
    collapse_check,
    dangelo_type,
    limit_boundary_fit,
    m_z_exact_exp,
    normal_form,
    normal_form_of_rho,
    one_sided,
    type_I_classifier,
    unit_grid,
    vanishing_order,
)
from holoscale.dsl import parse_expr
from holoscale.dsl.config import DOMAIN_NAMES, RHO_NAMES
from holoscale.errors import DegenerateGradient, NonConvergentRatio, SolveFailure

from .conftest import load

JS = list(range(1, 13))
SMALL = DiscSearch(degree=2, step=0.5, modulus=1.0)


def rho(src):
    return parse_expr(src, RHO_NAMES)


def r_expr(src):
    return parse_expr(src, DOMAIN_NAMES)


def samples(n=200, radius=0.3, seed=0):
    rng = np.random.default_rng(seed)
    z = radius * np.sqrt(rng.random(n)) * np.exp(2j * np.pi * rng.random(n))
    u = radius * (2 * rng.random(n) - 1)
    return z, u


# -- normal form ------------------------------------------------------------------------

def test_ball_normal_form_closed_form():
    nf = normal_form(r_expr("abs(z)^2 + abs(w)^2 - 1"), (0, 1j))
    z, u = samples()
    want = 1 - np.sqrt(1 - np.abs(z) ** 2 - u**2)
    assert np.max(np.abs(nf.rho_full(z, u) - want)) < 1e-10
    t = 1e-3
    assert nf.rho0(t) / t**2 == pytest.approx(0.5, abs=1e-6)
    assert nf.rho0(0.0) == pytest.approx(0, abs=1e-15)


def test_greene_krantz_normal_form():
    nf = normal_form(r_expr("abs(w)^2 + exp(-1/abs(z)^2) - 1"), (0, 1j))
    z, u = samples(radius=0.4)
    want = 1 - np.sqrt(1 - np.exp(-1 / np.abs(z) ** 2) - u**2)
    assert np.max(np.abs(nf.rho_full(z, u) - want)) < 1e-10


def test_half_space_is_already_normal():
    nf = normal_form(r_expr("-im(w)"), (0, 0))
    np.testing.assert_allclose(nf.frame, np.eye(2), atol=1e-9)
    z, u = samples()
    assert np.max(np.abs(nf.rho_full(z, u))) < 1e-12


def test_normal_form_idempotent():
    nf = normal_form(r_expr("1 - sqrt(1 - abs(z)^2 - re(w)^2) - im(w)"), (0, 0))
    assert nf.translation == (0, 0)
    assert abs(nf.frame[0, 1]) < 1e-9 and abs(nf.frame[1, 0]) < 1e-9
    np.testing.assert_allclose(np.abs(np.diag(nf.frame)), 1, atol=1e-9)


def test_normal_form_errors():
    with pytest.raises(SolveFailure):
        normal_form(r_expr("abs(z)^2 + abs(w)^2 - 1"), (0, 0.5))
    with pytest.raises(DegenerateGradient):
        normal_form(r_expr("(abs(z)^2 + abs(w)^2 - 1)^2"), (0, 1j))


@pytest.mark.parametrize("name", ["ball", "quartic", "cex1", "cex2", "greene_krantz"])
def test_explicit_rho_agrees_with_solved_boundary(name):
    cfg = load(name)
    nf = normal_form(cfg.domain, cfg.domain.boundary_point, cfg.domain.rho)
    z, u = samples(100, 0.15, seed=1)
    assert np.max(np.abs(nf.rho_full(z, u) - nf.solved(z, u))) < 1e-9
    # the u-linear coefficient is o(|z|) along rays
    for t in (1e-2, 1e-3):
        c = nf.u_linear_coefficient(t * np.exp(2j * np.pi * np.arange(8) / 8))
        assert np.max(np.abs(c)) / t < 50 * t + 1e-6


# -- vanishing orders -------------------------------------------------------------------

def test_vanishing_order_examples():
    assert vanishing_order(lambda x: x**3) == 3
    assert vanishing_order(lambda x: x**2 + x**5) == 2
    assert vanishing_order(lambda x: np.exp(-1 / np.abs(x) ** 2)) == AtLeast(12)


def test_vanishing_order_additive():
    fs = [lambda x: x**2, lambda x: np.sin(x) ** 3, lambda x: x + x**4, lambda x: 1 - np.cos(x)]
    for f in fs:
        for g in fs:
            assert vanishing_order(lambda x: f(x) * g(x)) == vanishing_order(f) + vanishing_order(g)


# -- D'Angelo type ----------------------------------------------------------------------

def test_type_of_quadric():
    rep = dangelo_type(normal_form_of_rho(rho("abs(z)^2")))
    assert rep.kind == TypeKind.FINITE and rep.t_estimate == 2
    assert rep.disc_witness.a[0] == 1 and not any(rep.disc_witness.b)
    assert rep.exhausted and rep.discs_tested > 3000


def test_type_of_quartic_and_no_better_disc():
    rep = dangelo_type(normal_form_of_rho(rho("abs(z)^4")))
    assert rep.kind == TypeKind.FINITE and rep.t_estimate == 4


def test_type_of_flat_function_not_finite():
    rep = dangelo_type(normal_form_of_rho(rho("exp(-1/abs(z)^2)")), SMALL)
    assert rep.kind == TypeKind.INFINITE_TYPE_I and np.isinf(rep.t_estimate)


def test_type_sees_complex_tangent_disc():
    # Im w > re(z^2) contains the disc (xi, i xi^2) in its boundary
    rep = dangelo_type(normal_form_of_rho(rho("re(z^2) + abs(z)^4")), SMALL)
    assert rep.t_estimate == 4
    rep = dangelo_type(normal_form_of_rho(rho("re(z^2)")), SMALL)
    assert np.isinf(rep.t_estimate) and rep.kind != TypeKind.FINITE


def test_type_monotone_in_search_breadth():
    nf = normal_form_of_rho(rho("re(z^2) + abs(z)^4 + abs(z)^2*re(z)^2"))
    ts = [dangelo_type(nf, s).t_estimate for s in (DiscSearch(1, 1.0, 1.0), SMALL, DiscSearch(2, 0.25, 1.0))]
    assert ts == sorted(ts)


def test_type_report_serialises():
    rep = dangelo_type(normal_form_of_rho(rho("exp(-1/abs(z)^2)")), SMALL)
    d = rep.to_dict()
    assert d["t_estimate"] == "inf" and d["kind"] == "InfiniteTypeI"
    assert len(d["m_z_samples"]) == 6


# -- infinite type I --------------------------------------------------------------------

def test_m_z_matches_exact_formula():
    kind, samples_ = type_I_classifier(Rho.of(rho("exp(-1/abs(z)^2)")).log)
    assert kind == TypeKind.INFINITE_TYPE_I
    for r, m in samples_:
        # the smallest m_z comes from |a| = 0.9
        assert m == pytest.approx(m_z_exact_exp(r, 0.9), rel=0.25)
    assert m_z_exact_exp(0.1, 0.5) == pytest.approx(300 / np.log(2))
    lr = Rho.of(rho("exp(-1/abs(z)^2)")).log
    m = (lr(0.05 + 0j) - lr(0.1 + 0j)) / np.log(0.5)
    assert m == pytest.approx(300 / np.log(2), rel=1e-9)


def test_first_power_is_type_one():
    kind, s = type_I_classifier(Rho.of(rho("exp(-1/abs(z))")).log)
    assert kind == TypeKind.INFINITE_TYPE_I
    assert s[-1][1] / s[-2][1] == pytest.approx(2, rel=0.25)
    assert s[0][1] == pytest.approx(m_z_exact_exp(s[0][0], 0.9, power=1), rel=0.25)


def test_homogeneous_is_not_type_one():
    kind, s = type_I_classifier(Rho.of(rho("abs(z)^4")).log)
    assert kind == TypeKind.INFINITE_TYPE_II_SUSPECT
    assert all(m == pytest.approx(4) for _, m in s)
    assert dangelo_type(normal_form_of_rho(rho("abs(z)^4")), SMALL).kind == TypeKind.FINITE


def test_classifier_invariances():
    base = type_I_classifier(Rho.of(rho("exp(-1/abs(z)^2)")).log)[1]
    for src in ("7*exp(-1/abs(z)^2)", "exp(-1/abs((0.6 + 0.8i)*z)^2)"):
        other = type_I_classifier(Rho.of(rho(src)).log)[1]
        for (_, a), (_, b) in zip(base, other):
            assert b == pytest.approx(a, rel=0.25)


def test_one_sided_precondition():
    assert one_sided(normal_form_of_rho(rho("abs(z)^2")))
    assert not one_sided(normal_form_of_rho(rho("re(z^2)")))


# -- collapse ---------------------------------------------------------------------------

def test_collapse_of_flat_function():
    b = [2.0**-j for j in JS]
    col = collapse_check(Rho.of(rho("exp(-1/abs(z)^2)")).log, b, b, b, unit_grid(11), JS)
    assert col.series[JS.index(8)] < 1e-12
    assert all(x >= y for x, y in zip(col.log_sup, col.log_sup[1:]))
    # j=12 value is far below double precision; check it in log space
    grid = unit_grid(11)
    peak = np.max(np.abs(grid[:, 0] + grid[:, 1])) ** 2 * 2.0**-24
    assert col.log_sup[-1] == pytest.approx(-1 / peak + 12 * np.log(2), rel=1e-12)


def test_collapse_of_quadric_control():
    grid = unit_grid(11)
    b = [2.0**-j for j in JS]
    col = collapse_check(Rho.of(rho("abs(z)^2")).log, b, b, b, grid, JS)
    peak = np.max(np.abs(grid[:, 0] + grid[:, 1]) ** 2)
    np.testing.assert_allclose(col.series, [2.0**-j * peak for j in JS], rtol=1e-12)


def test_collapse_of_zero():
    col = collapse_check(lambda z: np.full(np.shape(z), -np.inf), [0.5], [0.5], [0.5], unit_grid(5))
    assert col.sup == 0


# -- limit boundary ---------------------------------------------------------------------

def test_ball_limit_fit():
    cfg = load("ball")
    nf = normal_form(cfg.domain, cfg.domain.boundary_point, cfg.domain.rho)
    fit = limit_boundary_fit(cfg.family, cfg.q, nf, 2, JS)
    assert fit.residual < 1e-3
    assert abs(abs(fit.n[0]) ** 2 + abs(fit.n[1]) ** 2 - 1) < 1e-6


def test_quartic_limit_fit():
    cfg = load("quartic")
    nf = normal_form(cfg.domain, cfg.domain.boundary_point, cfg.domain.rho)
    fit = limit_boundary_fit(cfg.family, cfg.q, nf, 4, JS)
    assert fit.residual < 1e-9


@pytest.mark.parametrize("name,p", [("identity", (0, 1)), ("bidisc", (0, -1))])
def test_limit_fit_rejects_non_converging(name, p):
    cfg = load(name)
    nf = normal_form(r_expr("abs(z)^2 + abs(w)^2 - 1") if name == "identity" else cfg.domain, p)
    with pytest.raises(NonConvergentRatio):
        limit_boundary_fit(cfg.family, cfg.q, nf, 2, JS)
