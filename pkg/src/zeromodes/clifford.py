"""Gamma matrices, vacuum spinors and spin lifts of orthogonal matrices."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# singular values below NULL_RTOL * s_max count as zero
NULL_RTOL = 1e-10

SIGMA_1 = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_3 = np.array([[1, 0], [0, -1]], dtype=complex)
ID_2 = np.eye(2, dtype=complex)


class NotLiftable(ValueError):
    """No unitary intertwines the gamma matrices with their rotated set."""


class DegenerateLift(RuntimeError):
    """The intertwiner space is more than one-dimensional (reducible gamma set)."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class GammaSet:
    d: int
    gammas: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "gammas", _frozen(np.asarray(self.gammas, dtype=complex)))

    @property
    def N(self) -> int:
        return self.gammas.shape[1]

    def dot(self, x) -> np.ndarray:
        """gamma.x for a single vector or a stack of vectors (..., d) -> (..., N, N)."""
        return np.tensordot(np.asarray(x, dtype=float), self.gammas, axes=([-1], [0]))

    def anticommutator_residual(self) -> float:
        g = self.gammas
        eye = np.eye(self.N)
        worst = 0.0
        for j in range(self.d):
            for k in range(j, self.d):
                r = g[j] @ g[k] + g[k] @ g[j] - 2.0 * (j == k) * eye
                worst = max(worst, float(np.abs(r).max()))
        return worst

    def hermiticity_residual(self) -> float:
        return float(max(np.abs(g - g.conj().T).max() for g in self.gammas))

    def to_json(self) -> dict:
        return {
            "d": self.d,
            "N": self.N,
            "gammas": [[[[z.real, z.imag] for z in row] for row in g] for g in self.gammas],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "GammaSet":
        g = np.array(obj["gammas"], dtype=float)
        return cls(int(obj["d"]), g[..., 0] + 1j * g[..., 1])


def _odd_gammas(d: int) -> list[np.ndarray]:
    if d == 3:
        # pairs (gamma_2, gamma_3) = (sigma_2, sigma_3)
        return [SIGMA_1, SIGMA_2, SIGMA_3]
    lower = _odd_gammas(d - 2)
    n = lower[0].shape[0]
    out = [np.kron(g, SIGMA_3) for g in lower]
    out.append(np.kron(np.eye(n), SIGMA_1))
    out.append(np.kron(np.eye(n), SIGMA_2))
    return out


def build_gammas(d: int) -> GammaSet:
    """Hermitian anticommuting gamma matrices of size 2**(d//2) by tensor doubling.

    Odd dimensions are built from the Pauli triple by ``d -> d + 2`` steps; an
    even dimension uses the first ``d`` matrices of the set for ``d + 1``.
    """
    if int(d) != d or d < 3:
        raise ValueError(f"gamma matrices need an integer dimension d >= 3, got {d!r}")
    d = int(d)
    odd = d if d % 2 else d + 1
    gammas = np.array(_odd_gammas(odd)[:d])
    return GammaSet(d, gammas)


def nullspace(a: np.ndarray, rtol: float = NULL_RTOL) -> np.ndarray:
    """Orthonormal basis (columns) of the kernel of ``a``."""
    _, s, vh = np.linalg.svd(a)
    smax = s[0] if s.size else 0.0
    rank = int(np.sum(s > rtol * max(smax, 1e-300)))
    return vh[rank:].conj().T


def canonical_phase(v: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """Rotate ``v`` so its first non-negligible entry is real positive."""
    flat = v.ravel()
    scale = np.abs(flat).max()
    idx = int(np.argmax(np.abs(flat) > tol * scale))
    z = flat[idx]
    return v * (abs(z) / z)


@dataclass(frozen=True)
class VacuumSpinor:
    psi0: np.ndarray
    s: int

    def __post_init__(self):
        object.__setattr__(self, "psi0", _frozen(np.asarray(self.psi0, dtype=complex)))


def lowering_operators(G: GammaSet) -> list[np.ndarray]:
    return [
        0.5 * (G.gammas[2 * a - 1] + 1j * G.gammas[2 * a])
        for a in range(1, (G.d - 1) // 2 + 1)
    ]


def vacuum_residual(G: GammaSet, psi: np.ndarray) -> float:
    return float(max(np.abs(op @ psi).max() for op in lowering_operators(G)))


def vacuum_spinor(G: GammaSet) -> VacuumSpinor:
    """The unit spinor annihilated by every (gamma_{2a} + i gamma_{2a+1}) / 2."""
    if G.d % 2 == 0:
        raise ValueError(f"the vacuum spinor is defined for odd d only, got d={G.d}")
    kernel = nullspace(np.vstack(lowering_operators(G)))
    if kernel.shape[1] != 1:
        raise RuntimeError(f"vacuum kernel has dimension {kernel.shape[1]}, expected 1")
    psi0 = canonical_phase(kernel[:, 0] / np.linalg.norm(kernel[:, 0]))
    s_val = np.vdot(psi0, G.gammas[0] @ psi0).real
    s = 1 if s_val > 0 else -1
    if np.abs(G.gammas[0] @ psi0 - s * psi0).max() > 1e-10:
        raise RuntimeError("vacuum spinor is not a gamma_1 eigenvector")
    return VacuumSpinor(psi0, s)


@dataclass(frozen=True)
class SpinLift:
    O: np.ndarray
    U: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "O", _frozen(np.asarray(self.O, dtype=float)))
        object.__setattr__(self, "U", _frozen(np.asarray(self.U, dtype=complex)))

    def residual(self, G: GammaSet) -> float:
        """max_j |U* gamma_j U - sum_k gamma_k O_kj|."""
        U = self.U
        rotated = np.einsum("kab,kj->jab", G.gammas, self.O)
        lhs = np.einsum("ba,jbc,cd->jad", U.conj(), G.gammas, U)
        return float(np.abs(lhs - rotated).max())


def spin_lift(G: GammaSet, O) -> SpinLift:
    """Unitary U with U* gamma_j U = sum_k gamma_k O_kj, up to a global phase.

    The intertwiner is the common null vector of the maps
    X -> gamma_j X - X (sum_k gamma_k O_kj); by irreducibility it is a
    multiple of a unitary.
    """
    O = np.asarray(O, dtype=float)
    d, N = G.d, G.N
    if O.shape != (d, d):
        raise ValueError(f"O must be {d}x{d}, got shape {O.shape}")
    if np.abs(O.T @ O - np.eye(d)).max() > 1e-12:
        raise ValueError("O is not orthogonal to 1e-12")
    rotated = np.einsum("kab,kj->jab", G.gammas, O)
    eye = np.eye(N)
    # column-major vec: vec(A X B) = (B^T kron A) vec(X)
    blocks = [np.kron(eye, G.gammas[j]) - np.kron(rotated[j].T, eye) for j in range(d)]
    kernel = nullspace(np.vstack(blocks))
    if kernel.shape[1] == 0:
        raise NotLiftable(f"no spin lift for O with det {np.linalg.det(O):+.0f} in d={d}")
    if kernel.shape[1] > 1:
        raise DegenerateLift(f"intertwiner space has dimension {kernel.shape[1]}")
    X = kernel[:, 0].reshape(N, N, order="F")
    X = X * np.sqrt(N / np.trace(X.conj().T @ X).real)
    return SpinLift(O, canonical_phase(X))


def sandwich_residual(G: GammaSet, x, y) -> np.ndarray:
    """(g.x)(g.y)(g.x) - (-|x|^2 g.y + 2 (x.y) g.x); vanishes identically."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    gx, gy = G.dot(x), G.dot(y)
    return gx @ gy @ gx - (-(x @ x) * gy + 2.0 * (x @ y) * gx)


def rotation(d: int, i: int, j: int, angle: float) -> np.ndarray:
    """Rotation by ``angle`` in the (i, j) coordinate plane (1-based indices)."""
    O = np.eye(d)
    c, s = np.cos(angle), np.sin(angle)
    i, j = i - 1, j - 1
    O[i, i] = O[j, j] = c
    O[j, i] = s
    O[i, j] = -s
    return O


def random_rotation(d: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random element of SO(d)."""
    q, r = np.linalg.qr(rng.standard_normal((d, d)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q
