import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from zeromodes.calculus import fd_gradient
from zeromodes.clifford import build_gammas, random_rotation, spin_lift, vacuum_spinor
from zeromodes.fields import (
    ClosedFormSpinorField,
    ClosedFormVectorField,
    ScalarPhase,
    SingularPointError,
    ZeroModePair,
    assemble_A,
    conformal_invert,
    dirac_apply_analytic,
    equality_data,
    extremal_pair,
    gauge_transform,
    loss_yau_A,
    make_sigma,
    random_admissible,
    random_unit_spinor,
    sample_points,
    scalar_pair,
    skew_frame,
    skew_rank,
    sobolev_candidate,
    transform_pair,
    twistor,
)

ODD = [3, 5, 7]


def pair(d):
    G = build_gammas(d)
    return G, extremal_pair(G, vacuum_spinor(G))


@pytest.mark.parametrize("d", ODD)
def test_extremal_pair_is_zero_mode(d):
    _, P = pair(d)
    pts = sample_points(d, 200, np.random.default_rng(0))
    assert P.residual(pts).max() < 1e-13


@pytest.mark.parametrize("d", ODD)
def test_modulus_laws(d):
    _, P = pair(d)
    pts = sample_points(d, 100, np.random.default_rng(1))
    r2 = np.sum(pts**2, axis=1)
    assert np.allclose(np.linalg.norm(P.psi(pts), axis=1), (1 + r2) ** (-(d - 1) / 2), rtol=1e-13, atol=0)
    assert np.allclose(np.linalg.norm(P.A(pts), axis=1), d / (1 + r2), rtol=1e-13, atol=0)


def test_potential_at_origin():
    A = loss_yau_A(5)
    assert np.array_equal(A(np.zeros(5)), [5.0, 0, 0, 0, 0])


def test_sigma_block_structure():
    S = make_sigma(5)
    assert np.array_equal(S, -S.T)
    assert np.allclose(S.T @ S + np.diag([1, 0, 0, 0, 0]), np.eye(5))
    with pytest.raises(ValueError):
        make_sigma(4)


@pytest.mark.parametrize("d", [3, 4, 5])
def test_jet_matches_finite_differences(d):
    G = build_gammas(d)
    rng = np.random.default_rng(d)
    f = ClosedFormSpinorField(G, 1.3, random_unit_spinor(G.N, rng), random_unit_spinor(G.N, rng),
                              center=rng.standard_normal(d), scale=0.8, amplitude=1.7)
    x = rng.standard_normal(d)
    _, g = f.jet(x)
    assert np.abs(fd_gradient(f, x, 1e-5) - g).max() < 1e-8


@pytest.mark.parametrize("d", [3, 4, 5])
def test_closed_form_dirac_matches_jet(d):
    G = build_gammas(d)
    rng = np.random.default_rng(2)
    f = ClosedFormSpinorField(G, 2.0, random_unit_spinor(G.N, rng), random_unit_spinor(G.N, rng),
                              center=rng.standard_normal(d), scale=1.3, amplitude=0.5)
    pts = rng.standard_normal((50, d))
    assert np.abs(f.dirac(pts) - SpinorFieldDirac(f, pts)).max() < 1e-13
    assert np.abs(dirac_apply_analytic(f, G, pts) - f.dirac(pts)).max() == 0


def SpinorFieldDirac(f, pts):
    from zeromodes.fields import SpinorField

    return SpinorField.dirac(f, pts)


def test_vector_jacobian_matches_fd():
    rng = np.random.default_rng(3)
    d = 5
    O = random_rotation(d, rng)
    A = ClosedFormVectorField(O[:, 0], O @ make_sigma(d) @ O.T, 5.0, center=rng.standard_normal(d), scale=1.7)
    x = rng.standard_normal(d)
    J = A.jacobian(x)
    assert np.abs(fd_gradient(A, x, 1e-5).T - J).max() < 1e-8


def test_vector_field_rejects_non_skew():
    with pytest.raises(ValueError):
        ClosedFormVectorField(np.eye(3)[0], np.eye(3), 3.0)


@pytest.mark.parametrize("d", [3, 5])
def test_transform_pair(d):
    G, P = pair(d)
    rng = np.random.default_rng(4)
    a, b, c = rng.standard_normal(d), 2.5, 3.0
    Q = transform_pair(P, a, b, c, spin_lift(G, random_rotation(d, rng)))
    pts = a + b * sample_points(d, 200, rng)
    assert Q.residual(pts).max() < 1e-13
    r2 = np.sum((pts - a) ** 2, axis=1)
    # |A| = kappa b / (b^2 + r^2)
    assert np.allclose(np.linalg.norm(Q.A(pts), axis=1), d * b / (b * b + r2), rtol=1e-12)
    assert np.isclose(np.linalg.norm(Q.psi(a)), c)
    assert np.allclose(Q.A(a), d / b * Q.A.w)


def test_transform_pair_needs_closed_form():
    G, P = pair(3)
    inv = conformal_invert(P, G)
    with pytest.raises(TypeError):
        transform_pair(inv, np.zeros(3), 1.0, 1.0, spin_lift(G, np.eye(3)))


@pytest.mark.parametrize("d", [3, 5])
def test_gauge_and_inversion_are_zero_modes(d):
    G, P = pair(d)
    rng = np.random.default_rng(5)
    pts = sample_points(d, 100, rng)
    Pg = gauge_transform(P, ScalarPhase(0.3, rng.standard_normal(d), m=1.0))
    assert Pg.residual(pts).max() < 1e-12
    assert np.allclose(np.linalg.norm(Pg.psi(pts), axis=1), np.linalg.norm(P.psi(pts), axis=1))
    Pi = conformal_invert(P, G)
    res = Pi.residual(pts)
    scale = np.maximum(1.0, np.linalg.norm(Pi.A(pts), axis=1) * np.linalg.norm(Pi.psi(pts), axis=1))
    assert (res / scale).max() < 1e-12


def test_inversion_singular_at_origin():
    G, P = pair(3)
    with pytest.raises(SingularPointError):
        conformal_invert(P, G).psi(np.zeros(3))


def test_scalar_phase_gradient():
    rng = np.random.default_rng(6)
    ph = ScalarPhase(0.4, rng.standard_normal(3), m=1.5, center=rng.standard_normal(3))
    x = rng.standard_normal(3)
    assert np.abs(fd_gradient(ph.value, x, 1e-5) - ph.gradient(x)).max() < 1e-9


@pytest.mark.parametrize("d", [3, 5, 7])
def test_equality_data_of_extremal(d):
    G = build_gammas(d)
    v = vacuum_spinor(G)
    data = equality_data(G, v.psi0, 1j * v.s * v.psi0)
    assert np.allclose(data.w, np.eye(d)[0], atol=1e-14)
    assert np.allclose(data.M, make_sigma(d), atol=1e-14)
    assert data.structure_ok and not data.parity_obstruction
    assert data.s == v.s
    assert max(data.residuals[f"homogeneity{k}"] for k in (0, 1, 3)) < 1e-13
    A = assemble_A(d, data)
    assert np.array_equal(A.M, data.M)


def test_equality_data_rejects_inadmissible():
    G = build_gammas(3)
    with pytest.raises(ValueError, match="admissibility"):
        equality_data(G, np.array([1, 0], complex), np.array([1, 0], complex))


@pytest.mark.parametrize("d", [4, 6])
def test_even_dimension_obstruction(d):
    G = build_gammas(d)
    rng = np.random.default_rng(d)
    for _ in range(10):
        data = equality_data(G, *random_admissible(G, rng))
        assert data.parity_obstruction and not data.structure_ok
        assert data.skew_rank % 2 == 0
        with pytest.raises(ValueError):
            assemble_A(d, data)


@given(st.integers(3, 9), st.integers(0, 2**31))
@settings(max_examples=40, deadline=None)
def test_skew_rank_is_even(d, seed):
    X = np.random.default_rng(seed).standard_normal((d, d))
    assert skew_rank(X - X.T) % 2 == 0


@pytest.mark.parametrize("d", [3, 5, 7])
def test_skew_frame(d):
    rng = np.random.default_rng(d)
    O = random_rotation(d, rng)
    M, w = O @ make_sigma(d) @ O.T, O[:, 0]
    F = skew_frame(M, w)
    assert np.abs(F.T @ F - np.eye(d)).max() < 1e-12
    assert np.abs(F.T @ M @ F - make_sigma(d)).max() < 1e-12
    assert np.abs(F[:, 0] - w).max() < 1e-12
    assert np.isclose(np.linalg.det(F), 1.0)


@pytest.mark.parametrize("d", [3, 4, 5])
@pytest.mark.parametrize("s", [1, -1])
def test_scalar_pair(d, s):
    G = build_gammas(d)
    rng = np.random.default_rng(d)
    psi, lam = scalar_pair(G, random_unit_spinor(G.N, rng), s)
    pts = sample_points(d, 100, rng)
    _, g = psi.jet(pts)
    lhs = -1j * np.einsum("kab,nkb->na", G.gammas, g)
    assert np.abs(lhs - lam(pts)[:, None] * psi(pts)).max() < 1e-13
    assert lam(np.zeros(d)) == s * d


def test_scalar_pair_rejects_bad_input():
    G = build_gammas(3)
    with pytest.raises(ValueError):
        scalar_pair(G, np.array([2, 0], complex), 1)
    with pytest.raises(ValueError):
        scalar_pair(G, np.array([1, 0], complex), 0)


def test_sobolev_candidate_side_conditions():
    G = build_gammas(3)
    rng = np.random.default_rng(9)
    phi0, phi1 = random_admissible(G, rng)
    f = sobolev_candidate(G, phi0, phi1)
    assert f.modulus_is_radial()
    with pytest.raises(ValueError):
        sobolev_candidate(G, phi0, 2 * phi1)


def test_twistor_is_affine():
    G = build_gammas(3)
    T = twistor(G, np.array([1, 0], complex), np.array([0, 1], complex))
    x = np.array([0.3, -1.0, 2.0])
    assert np.allclose(T(x), T.phi_lo + G.dot(x) @ T.phi_hi)


def test_json_round_trips():
    G, P = pair(5)
    psi = ClosedFormSpinorField.from_json(P.psi.to_json(), G)
    A = ClosedFormVectorField.from_json(P.A.to_json())
    pts = sample_points(5, 20, np.random.default_rng(0))
    assert np.array_equal(psi(pts), P.psi(pts))
    assert np.array_equal(A(pts), P.A(pts))
    with pytest.raises(ValueError):
        ClosedFormVectorField.from_json({"family": "other"})


def test_single_point_shapes():
    G, P = pair(3)
    v, g = P.psi.jet(np.ones(3))
    assert v.shape == (2,) and g.shape == (3, 2)
    assert P.A(np.ones(3)).shape == (3,)
    assert isinstance(P, ZeroModePair)
