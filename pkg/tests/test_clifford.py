import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from zeromodes.clifford import (
    GammaSet,
    NotLiftable,
    build_gammas,
    canonical_phase,
    lowering_operators,
    nullspace,
    random_rotation,
    rotation,
    sandwich_residual,
    spin_lift,
    vacuum_residual,
    vacuum_spinor,
)

DIMS = list(range(3, 10))


@pytest.mark.parametrize("d", DIMS)
def test_gammas_anticommute_and_are_hermitian(d):
    G = build_gammas(d)
    assert G.N == 2 ** (d // 2)
    assert G.gammas.shape == (d, G.N, G.N)
    assert G.anticommutator_residual() == 0.0
    assert G.hermiticity_residual() == 0.0


def test_pauli_base_case():
    G = build_gammas(3)
    assert np.array_equal(G.gammas[0], [[0, 1], [1, 0]])
    assert np.array_equal(G.gammas[2], [[1, 0], [0, -1]])


@pytest.mark.parametrize("d", [4, 6, 8])
def test_even_dimension_is_truncation(d):
    assert np.array_equal(build_gammas(d).gammas, build_gammas(d + 1).gammas[:d])


@pytest.mark.parametrize("bad", [2, 1, 0, -3, 3.5])
def test_build_gammas_rejects_small_or_fractional(bad):
    with pytest.raises(ValueError):
        build_gammas(bad)


def test_gammas_are_read_only():
    G = build_gammas(3)
    with pytest.raises(ValueError):
        G.gammas[0, 0, 0] = 5


def test_json_round_trip():
    G = build_gammas(5)
    H = GammaSet.from_json(G.to_json())
    assert H.d == 5 and np.array_equal(H.gammas, G.gammas)


@pytest.mark.parametrize("d", [3, 5, 7, 9])
def test_vacuum_spinor(d):
    G = build_gammas(d)
    v = vacuum_spinor(G)
    assert abs(np.linalg.norm(v.psi0) - 1.0) < 1e-14
    assert vacuum_residual(G, v.psi0) < 1e-14
    assert v.s == 1
    assert np.abs(G.gammas[0] @ v.psi0 - v.s * v.psi0).max() < 1e-14
    # canonical phase: first significant entry is real positive
    k = np.argmax(np.abs(v.psi0) > 1e-8)
    assert v.psi0[k].real > 0 and v.psi0[k].imag == 0


def test_vacuum_spinor_even_d_raises():
    with pytest.raises(ValueError):
        vacuum_spinor(build_gammas(4))


def test_lowering_operator_count():
    assert len(lowering_operators(build_gammas(7))) == 3


def test_nullspace_and_phase():
    a = np.array([[1.0, 1.0], [2.0, 2.0]])
    k = nullspace(a)
    assert k.shape == (2, 1) and np.abs(a @ k).max() < 1e-14
    v = canonical_phase(np.array([0.0, 1j, 1.0]))
    assert v[1] == 1.0


@pytest.mark.parametrize("d", [3, 4, 5, 6, 7])
def test_spin_lift_random(d):
    rng = np.random.default_rng(d)
    G = build_gammas(d)
    for _ in range(5):
        L = spin_lift(G, random_rotation(d, rng))
        assert L.residual(G) < 1e-12
        assert np.abs(L.U.conj().T @ L.U - np.eye(G.N)).max() < 1e-12


def test_plane_rotation_lift_is_exponential():
    G = build_gammas(3)
    theta = 0.9
    L = spin_lift(G, rotation(3, 1, 2, theta))
    expected = scipy.linalg.expm(0.5 * theta * G.gammas[0] @ G.gammas[1])
    phase = np.vdot(expected.ravel(), L.U.ravel())
    phase /= abs(phase)
    assert np.abs(L.U - phase * expected).max() < 1e-12


def test_minus_identity_not_liftable_in_d3():
    with pytest.raises(NotLiftable):
        spin_lift(build_gammas(3), -np.eye(3))


def test_minus_identity_liftable_in_d4():
    # -I has determinant +1 in even d
    L = spin_lift(build_gammas(4), -np.eye(4))
    assert L.residual(build_gammas(4)) < 1e-12


def test_spin_lift_rejects_non_orthogonal():
    with pytest.raises(ValueError):
        spin_lift(build_gammas(3), np.diag([1.0, 1.0, 1.1]))
    with pytest.raises(ValueError):
        spin_lift(build_gammas(3), np.eye(4))


def test_composition_equivariance():
    # U* gamma_j U = gamma.(O e_j) makes O -> U an anti-homomorphism up to phase
    rng = np.random.default_rng(11)
    G = build_gammas(5)
    O1, O2 = random_rotation(5, rng), random_rotation(5, rng)
    U1, U2, U12 = (spin_lift(G, O).U for O in (O1, O2, O1 @ O2))
    for X in G.gammas:
        lhs = U12 @ X @ U12.conj().T
        rhs = (U2 @ U1) @ X @ (U2 @ U1).conj().T
        assert np.abs(lhs - rhs).max() < 1e-11


@given(st.lists(st.floats(-3, 3), min_size=6, max_size=6))
@settings(max_examples=50, deadline=None)
def test_sandwich_identity(vals):
    G = build_gammas(3)
    assert np.abs(sandwich_residual(G, vals[:3], vals[3:])).max() < 1e-12


def test_rotation_convention():
    O = rotation(3, 1, 2, np.pi / 2)
    assert np.allclose(O @ [1, 0, 0], [0, 1, 0])
    assert np.isclose(np.linalg.det(O), 1.0)
