import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zeromodes.calculus import (
    QuadratureError,
    QuadratureScheme,
    QuotientField,
    RegularizedModulus,
    default_angular_order,
    fd_gradient,
    integrate,
    integrate_radial,
    lp_norm,
    observed_order,
    penrose_component,
    penrose_components,
    sobolev_constant,
    sphere_area,
)
from zeromodes.clifford import build_gammas, vacuum_spinor
from zeromodes.fields import ClosedFormSpinorField, extremal_pair, random_unit_spinor, twistor


def test_sphere_area_low_dimensions():
    assert math.isclose(sphere_area(1), 2 * math.pi)
    assert math.isclose(sphere_area(2), 4 * math.pi)
    assert math.isclose(sphere_area(3), 2 * math.pi**2)


def test_sobolev_constant_d3():
    # 3/4 (2 pi^2)^(2/3)
    assert math.isclose(sobolev_constant(3), 0.75 * (2 * math.pi**2) ** (2 / 3), rel_tol=1e-15)
    assert abs(sobolev_constant(3) - 5.4779) < 1e-4
    with pytest.raises(ValueError):
        sobolev_constant(2)


@pytest.mark.parametrize("d,tol", [(3, 1e-12), (4, 1e-12), (5, 1e-12), (7, 1e-9)])
@pytest.mark.parametrize("radial", [True, False])
def test_calibration_integral(d, tol, radial):
    S = QuadratureScheme(d, 80)
    val = integrate(lambda x: (1 + np.sum(x * x, axis=1)) ** (-d), S, radial=radial)
    assert abs(val / (2.0 ** (-d) * sphere_area(d)) - 1) < tol


def test_gaussian_moment_full_rule():
    # int |x|^2 e^{-|x|^2} over R^3 = 3/2 pi^(3/2)
    S = QuadratureScheme(3, 120)
    val = integrate(lambda x: np.sum(x * x, 1) * np.exp(-np.sum(x * x, 1)), S)
    assert math.isclose(val, 1.5 * math.pi**1.5, rel_tol=1e-10)


def test_angular_rule_integrates_polynomials():
    # <x_1^4> over S^3 is 3 / (d (d + 2)) = 1/8 for d = 4
    S = QuadratureScheme(4, 4, 8)
    dirs, w = S.angular()
    assert math.isclose(w.sum(), sphere_area(3), rel_tol=1e-14)
    assert math.isclose((w * dirs[:, 0] ** 4).sum() / w.sum(), 1 / 8, rel_tol=1e-13)
    assert np.allclose(np.linalg.norm(dirs, axis=1), 1.0)


def test_vector_valued_integrand_and_center():
    S = QuadratureScheme(3, 80)
    c = np.array([1.0, -2.0, 0.5])
    f = lambda x: np.stack([(1 + np.sum((x - c) ** 2, 1)) ** -3] * 2, axis=1)
    v = integrate(f, S, center=c)
    assert v.shape == (2,)
    assert np.allclose(v, 2.0**-3 * sphere_area(3), rtol=1e-12)


def test_integrate_radial_profile():
    S = QuadratureScheme(5, 80)
    assert math.isclose(integrate_radial(lambda r: (1 + r * r) ** -5, S), 2.0**-5 * sphere_area(5), rel_tol=1e-12)


def test_non_finite_integrand_raises():
    S = QuadratureScheme(3, 10, 4)
    with pytest.raises(QuadratureError):
        integrate(lambda x: np.full(len(x), np.nan), S)


def test_scheme_defaults_and_json():
    S = QuadratureScheme(5)
    assert S.angular_order == default_angular_order(5)
    assert S.to_json()["nodes"] == S.node_count
    assert S.with_orders(radial_order=10).radial_order == 10
    with pytest.raises(ValueError):
        QuadratureScheme(1)


def test_lp_norm_extremal():
    G = build_gammas(3)
    P = extremal_pair(G, vacuum_spinor(G))
    S = QuadratureScheme(3, 200)
    # int |psi|^3 = int (1+r^2)^-3 = |S^3| / 8
    assert math.isclose(lp_norm(P.psi, 3, S, radial=True) ** 3, sphere_area(3) / 8, rel_tol=1e-12)
    with pytest.raises(ValueError):
        lp_norm(P.psi, 0.5, S)


@pytest.mark.parametrize("d", [3, 4, 5])
def test_twistor_penrose_vanishes(d):
    G = build_gammas(d)
    rng = np.random.default_rng(d)
    T = twistor(G, random_unit_spinor(G.N, rng), random_unit_spinor(G.N, rng))
    pts = rng.standard_normal((30, d)) * 3
    assert np.abs(penrose_components(T, pts)).max() < 1e-13
    assert penrose_component(T, G, 0, pts).shape == (30, G.N)


def test_penrose_detects_quadratic_term():
    G = build_gammas(3)
    f = ClosedFormSpinorField(G, -1.0, np.array([1, 0], complex), np.array([0, 1], complex))
    assert np.abs(penrose_components(f, np.ones((1, 3)))).max() > 0.1


def test_quotient_jet_matches_fd():
    G = build_gammas(5)
    rng = np.random.default_rng(1)
    f = ClosedFormSpinorField(G, 2.5, random_unit_spinor(G.N, rng), random_unit_spinor(G.N, rng))
    Q = QuotientField(f, 5 / 4, eps=0.3)
    x = rng.standard_normal(5)
    assert np.abs(fd_gradient(Q, x, 1e-5) - Q.jet(x)[1]).max() < 1e-8


def test_regularized_modulus():
    G = build_gammas(3)
    P = extremal_pair(G, vacuum_spinor(G))
    m = RegularizedModulus(P.psi, 0.1)
    x = np.array([0.4, 0.2, -1.0])
    assert math.isclose(m(x), math.sqrt(np.linalg.norm(P.psi(x)) ** 2 + 0.01))
    g = m.power_gradient(x, 0.5)
    assert np.abs(fd_gradient(lambda y: m.power(y, 0.5), x, 1e-5) - g).max() < 1e-9
    with pytest.raises(ValueError):
        RegularizedModulus(P.psi, 0.0)


def test_fd_observed_order_two():
    G = build_gammas(3)
    P = extremal_pair(G, vacuum_spinor(G))
    x = np.array([0.3, -0.7, 0.4])
    exact = P.psi.jet(x)[1]
    steps = [2e-2, 1e-2, 5e-3, 2.5e-3]
    errs = [np.abs(fd_gradient(P.psi, x, h) - exact).max() for h in steps]
    assert abs(observed_order(errs, steps) - 2.0) < 0.1


@given(st.floats(0.2, 5.0), st.floats(1.0, 3.0))
@settings(max_examples=25, deadline=None)
def test_scaling_of_radial_integrals(b, a):
    # int (b^2 + r^2)^-(a + 3/2) over R^3 scales like b^-2a
    S = QuadratureScheme(3, 120)
    f = lambda s: integrate(lambda x: (s * s + np.sum(x * x, 1)) ** -(a + 1.5), S, radial=True)
    assert math.isclose(f(b), f(1.0) * b ** (-2 * a), rel_tol=1e-6)
