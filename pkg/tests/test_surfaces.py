import math

import numpy as np
import pytest
import sympy as sp
from scipy.optimize import brentq

from calabi_kit.exceptions import DomainError, ParameterError
from calabi_kit.geometry import homothety_factor, metric_from_potential
from calabi_kit.surfaces import (
    GOParams,
    build_surface,
    cayley_to_disc,
    cayley_to_half_plane,
    elliptic_series,
    go_derivative_check,
    go_potential,
    go_residual,
    inoue_d0,
    parse_surface,
)

GO_SETS = [(1.0, 1.0), (4 / 3, 2 / 3), (1.8, 0.2)]


def go_oracle(a, b, z):
    s1, s2 = abs(z[0]) ** 2, abs(z[1]) ** 2
    return math.exp(brentq(lambda L: s1 * math.exp(-a * L) + s2 * math.exp(-b * L) - 1, -300, 300, xtol=1e-15))


def wirtinger_hessian(expr, coords):
    """Symbolic ``d^2 f / dz_a dconj(z_b)`` from real coordinates ``[(x1, y1), (x2, y2)]``."""
    n = len(coords)
    out = sp.zeros(n, n)
    for a, (xa, ya) in enumerate(coords):
        for b, (xb, yb) in enumerate(coords):
            out[a, b] = (sp.diff(expr, xa, xb) + sp.diff(expr, ya, yb)
                         + sp.I * (sp.diff(expr, xa, yb) - sp.diff(expr, ya, xb))) / 4
    return out


def evaluate_symbolic(matrix, coords, z):
    subs = {}
    for (x, y), v in zip(coords, z):
        subs[x], subs[y] = float(v.real), float(v.imag)
    return np.array(matrix.subs(subs).evalf(), dtype=complex)


X1, Y1, X2, Y2 = sp.symbols("x1 y1 x2 y2", real=True)
COORDS = [(X1, Y1), (X2, Y2)]


# -- GO potential ------------------------------------------------------------------


def test_go_examples():
    for a, b in GO_SETS:
        assert go_potential(GOParams(a, b), np.array([1.0, 0.0])) == pytest.approx(1.0, abs=1e-12)
    z = np.array([0.7 + 0.2j, -1.3j])
    assert go_potential(GOParams(1, 1), z) == pytest.approx(np.sum(np.abs(z) ** 2), abs=1e-12)
    t = (math.sqrt(5) - 1) / 2
    assert go_potential(GOParams(4 / 3, 2 / 3), np.array([1.0, 1.0])) == pytest.approx(t**-1.5, rel=1e-13)
    assert t**-1.5 == pytest.approx(2.0582, abs=1e-4)


@pytest.mark.parametrize("a,b", GO_SETS)
def test_go_residual_and_oracle(a, b):
    rng = np.random.default_rng(17)
    z = (rng.normal(size=(1000, 2)) + 1j * rng.normal(size=(1000, 2))) * np.exp(rng.uniform(-4, 4, (1000, 1)))
    params = GOParams(a, b)
    assert np.max(np.abs(go_residual(params, z))) < 1e-12
    phi = go_potential(params, z)
    for i in range(0, 1000, 97):
        assert phi[i] == pytest.approx(go_oracle(a, b, z[i]), rel=1e-12)


def test_go_origin():
    with pytest.raises(DomainError):
        go_potential(GOParams(1, 1), np.zeros(2))


def test_go_rotation_invariance():
    rng = np.random.default_rng(1)
    params = GOParams(1.8, 0.2)
    for _ in range(20):
        z = rng.normal(size=2) + 1j * rng.normal(size=2)
        assert go_potential(params, z) == pytest.approx(go_potential(params, np.abs(z)), rel=1e-12)


def test_go_params_validation():
    with pytest.raises(ParameterError):
        GOParams(1.2, 0.9)
    with pytest.raises(ParameterError):
        GOParams(0.8, 1.2)
    p = GOParams.from_moduli(4, 2)
    assert p.a == pytest.approx(4 / 3) and p.b == pytest.approx(2 / 3)
    with pytest.raises(ParameterError):
        GOParams.from_moduli(2, 3)


def go_t_series_oracle():
    """Taylor coefficients of phi(t) for a=4/3, b=2/3, |z2|=1: u = phi^(-2/3), t u^2 + u = 1."""
    t = sp.symbols("t")
    u = (sp.sqrt(1 + 4 * t) - 1) / (2 * t)
    phi = sp.series(u ** sp.Rational(-3, 2), t, 0, 4).removeO()
    return [float(phi.coeff(t, j) * math.factorial(j)) for j in range(4)]


def test_go_derivative_check_flat():
    closed, fd = go_derivative_check(GOParams(1, 1), 1.0, 1)
    assert closed == pytest.approx(1.0) and fd == pytest.approx(1.0, abs=1e-8)


def test_go_derivative_check_against_series_oracle():
    oracle = go_t_series_oracle()
    params = GOParams(4 / 3, 2 / 3)
    c1, f1 = go_derivative_check(params, 1.0, 1)
    c2, f2 = go_derivative_check(params, 1.0, 2)
    c3, f3 = go_derivative_check(params, 1.0, 3)
    assert c1 == pytest.approx(1.5) == pytest.approx(oracle[1])
    assert abs(f1 - c1) < 1e-5
    assert c2 == pytest.approx(-2.25) == pytest.approx(oracle[2])
    assert abs(f2 - c2) < 1e-4
    assert c3 == pytest.approx(13.125) == pytest.approx(oracle[3])
    assert abs(f3 - c3) < 1e-4 * abs(c3)


def test_go_derivative_check_other_point():
    params = GOParams(1.8, 0.2)
    for j in (1, 2, 3):
        closed, fd = go_derivative_check(params, 0.7 + 0.2j, j)
        assert np.sign(closed) == np.sign(fd)
        assert abs(closed - fd) < 1e-3 * abs(closed)


def test_go_derivative_range():
    with pytest.raises(ParameterError):
        go_derivative_check(GOParams(1, 1), 1.0, 4)


def test_go_automorphy_factor():
    s = build_surface("hopf:alpha=3,beta=1.5")
    res = homothety_factor(s.decks["gamma"], s.covering_metric, s.samples(30, 2), spread_tol=1e-8)
    assert res.homothetic
    assert res.factor == pytest.approx(4.5, rel=1e-10)
    z = s.samples(5, 3)
    gz = np.array([s.decks["gamma"](p) for p in z])
    assert np.allclose(s.potential(gz), 4.5 * s.potential(z), rtol=1e-12)


def test_go_lee_form_is_minus_dlog_phi():
    s = build_surface("hopf:a=1.8,b=0.2")
    z = np.array([0.6 + 0.1j, -0.4 + 0.9j])
    theta = s.lck_metric.lee_form(z)
    h = 1e-6
    x = np.array([z[0].real, z[0].imag, z[1].real, z[1].imag])
    for r in range(4):
        e = np.zeros(4)
        e[r] = h
        plus = x + e
        minus = x - e
        fp = math.log(s.potential(plus[0::2] + 1j * plus[1::2]))
        fm = math.log(s.potential(minus[0::2] + 1j * minus[1::2]))
        assert theta[r] == pytest.approx(-(fp - fm) / (2 * h), rel=1e-6)


# -- selectors ---------------------------------------------------------------------


def test_parse_selectors():
    assert parse_surface("hopf:alpha=2,beta=2i").params == {"alpha": 2.0, "beta": 2j}
    assert parse_surface("hopf:alpha=1+2i,beta=-1-1.5i").params == {"alpha": 1 + 2j, "beta": -1 - 1.5j}
    assert parse_surface("hopf:a=4/3,b=2/3").params["a"] == pytest.approx(4 / 3)
    assert parse_surface("parton:k=3").params == {"k": 3}
    assert parse_surface("inoue:m=0,1,0,0,0,1,1,1,0").params["m"] == (0, 1, 0, 0, 0, 1, 1, 1, 0)
    assert parse_surface("elliptic").family == "properly-elliptic"
    assert parse_surface("hopf-ambient:n=3,lambda=2").selector == "hopf-ambient:lambda=2.0,n=3"


@pytest.mark.parametrize(
    "text",
    ["nothing", "parton:q=2", "inoue:m=1,2,3", "hopf:alpha=1.5,beta=2", "hopf:alpha=2", "parton:k=0",
     "inoue:m=1,0,0,0,1,0,0,0,1", "hopf-ambient:lambda=1"],
)
def test_invalid_selectors(text):
    with pytest.raises(ParameterError):
        build_surface(text)


# -- catalog ------------------------------------------------------------------------


def test_parton_surface():
    s = build_surface("parton:k=2,alpha=3")
    z = np.array([0.5 + 0.5j, -1.0 + 0.2j])
    assert s.potential(z) == pytest.approx(0.5 * np.sum(np.abs(z) ** 2) ** 2)
    assert np.allclose(s.decks["alpha"](z), 3 * z)
    assert s.facts["lambda"] == 9


def test_kodaira_derivative_table():
    x, y, p, q = X1, Y1, X2, Y2
    u = (x**2 + y**2) / 2 + q
    oracle = wirtinger_hessian(sp.exp(u / 2), COORDS)
    s = build_surface("kodaira")
    for z in s.samples(5, 0):
        assert np.allclose(s.covering_metric(z), evaluate_symbolic(oracle, COORDS, z), rtol=1e-12)


def test_kodaira_lck_is_rescaled_hessian():
    s = build_surface("kodaira")
    for z in s.samples(5, 1):
        u = 0.5 * abs(z[0]) ** 2 + z[1].imag
        assert np.allclose(s.lck_metric(z), 8 * math.exp(-u / 2) * s.covering_metric(z), rtol=1e-12)


def test_elliptic_hessian_oracle():
    g = X1 * 0 + (Y1 * X2 - X1 * Y2)  # Im(z1 conj z2)
    oracle = wirtinger_hessian(-1 / g, COORDS)
    s = build_surface("elliptic")
    for z in s.samples(5, 0):
        assert s.potential.domain_guard(z)
        assert np.allclose(s.covering_metric(z), evaluate_symbolic(oracle, COORDS, z), rtol=1e-11)


def test_elliptic_series_matches_closed_form():
    series = elliptic_series(12)
    s = build_surface("elliptic")
    for dz in ([0.01, 0.02j], [0.03, 0.0], [-0.02j, 0.01 + 0.01j]):
        dz = np.array(dz, dtype=complex)
        assert series.evaluate(dz).real == pytest.approx(s.potential(np.array([1.0, 0.5j]) + dz), rel=1e-12)


def test_elliptic_domain_guard():
    s = build_surface("elliptic")
    assert s.potential.domain_guard(np.array([1.0, 0.5j]))
    assert not s.potential.domain_guard(np.array([1.0, -0.5j]))
    assert not s.potential.domain_guard(np.array([1.0, -1j]))


def test_inoue_data():
    s = build_surface("inoue")
    data = s.facts["data"]
    rho = float(max(np.roots([1, 0, -1, -1]).real))
    assert data.rho == pytest.approx(1.32472, abs=1e-5) and data.rho == pytest.approx(rho, rel=1e-12)
    assert abs(data.mu) ** 2 == pytest.approx(1 / rho, rel=1e-12)
    assert np.allclose(data.matrix @ data.m, data.mu * data.m)
    assert np.allclose(data.matrix @ data.ell, data.rho * data.ell)
    z = np.array([0.2 + 0.1j, 0.3 + 1.5j])
    assert np.allclose(s.decks["f0"](z), [data.mu * z[0], data.rho * z[1]])
    assert np.allclose(s.decks["f2"](z), z + np.array([data.m[1], data.ell[1]]))


def test_tricerri_homothety():
    s = build_surface("inoue")
    res = homothety_factor(s.decks["f0"], s.covering_metric, s.samples(25, 3))
    assert res.factor == pytest.approx(s.facts["mu_abs2"], rel=1e-9)


def test_inoue_d0_hessian_oracle():
    w2 = X2**2 + Y2**2
    d0 = X1**2 + Y1**2 + 2 * (2 - 2 * Y2) * w2 / (1 - w2)
    oracle = wirtinger_hessian(d0, COORDS)
    s = build_surface("inoue")
    for z in s.immersion_samples(5, 0):
        assert np.allclose(s.immersion_target(z), evaluate_symbolic(oracle, COORDS, z), rtol=1e-11)
        assert inoue_d0(z)[0] == pytest.approx(s.immersion_potential(z))


def test_inoue_half_plane_metric_is_quarter_d0():
    # transport the half-plane covering metric to the disc chart
    s = build_surface("inoue")
    for z in s.immersion_samples(5, 1):
        w = cayley_to_half_plane(z[1])
        dw = 2 / (1j * z[1] + 1) ** 2
        h = s.covering_metric(np.array([z[0], w]))
        moved = np.diag([h[0, 0], h[1, 1] * abs(dw) ** 2])
        target = s.immersion_target(z)
        assert moved[1, 1] == pytest.approx(0.25 * target[1, 1], rel=1e-12)
        assert cayley_to_disc(w) == pytest.approx(z[1])


def test_inoue_disc_decks_consistent():
    s = build_surface("inoue")
    for name, deck in s.immersion_decks.items():
        for z in s.immersion_samples(5, 2):
            w = cayley_to_half_plane(z[1])
            expected = s.decks[name](np.array([z[0], w]))
            moved = deck(z)
            assert moved[0] == pytest.approx(expected[0])
            assert cayley_to_half_plane(moved[1]) == pytest.approx(expected[1])
            # Jacobian against central differences in the disc variable
            h = 1e-6
            e = np.array([0, h])
            fd = (deck(z + e)[1] - deck(z - e)[1]) / (2 * h)
            assert deck.jacobian(z)[1, 1] == pytest.approx(fd, rel=1e-7)


def test_kodaira_exact_series_origin():
    s = build_surface("kodaira")
    assert np.allclose(metric_from_potential(s.potential, np.zeros(2), method="series"), np.diag([0.25, 1 / 16]))


def test_notes_present():
    assert build_surface("parton:k=2").notes
    assert any("1/4" in n for n in build_surface("inoue").notes)
