"""Closed-form spinor and vector fields: the extremal zero modes and their orbit.

Every spinor field exposes ``jet(x) -> (value, grad)`` with ``value`` of shape
``(n, N)`` and ``grad[:, k]`` the exact partial derivative along ``x_k``; vector
fields expose ``value`` and (where needed) ``jacobian`` with
``jac[:, i, k] = d A_i / d x_k``.  Points are ``(n, d)`` arrays; a single
``(d,)`` point is accepted and the leading axis is dropped again on output.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import scipy.linalg

from . import _kernels
from .clifford import GammaSet, SpinLift, VacuumSpinor, _frozen, nullspace


def _as_points(x, d: int) -> tuple[np.ndarray, bool]:
    x = np.asarray(x, dtype=float)
    single = x.ndim == 1
    x = np.atleast_2d(x)
    if x.shape[-1] != d:
        raise ValueError(f"points must have trailing dimension {d}, got {x.shape}")
    return x, single


def _out(a: np.ndarray, single: bool) -> np.ndarray:
    return a[0] if single else a


def gamma_apply(G: GammaSet, vec: np.ndarray, spinor: np.ndarray) -> np.ndarray:
    """(gamma . vec) spinor, row-wise: vec (n, d), spinor (n, N) or (N,)."""
    if spinor.ndim == 1:
        return np.einsum("kab,nk,b->na", G.gammas, vec, spinor)
    return np.einsum("kab,nk,nb->na", G.gammas, vec, spinor)


def dirac_from_grad(G: GammaSet, grad: np.ndarray) -> np.ndarray:
    """gamma . (-i nabla) psi from the gradient stack (n, d, N)."""
    return -1j * np.einsum("kab,nkb->na", G.gammas, grad)


class SpinorField:
    """Interface: evaluable spinor field with exact first derivatives."""

    G: GammaSet

    @property
    def d(self) -> int:
        return self.G.d

    def jet(self, x):
        raise NotImplementedError

    def __call__(self, x) -> np.ndarray:
        return self.jet(x)[0]

    def dirac(self, x) -> np.ndarray:
        pts, single = _as_points(x, self.d)
        _, grad = self.jet(pts)
        return _out(dirac_from_grad(self.G, grad), single)


@dataclass(frozen=True, eq=False)
class ClosedFormSpinorField(SpinorField):
    """c * (b^2 / (b^2 + |x - center|^2))^power * (phi_lo + gamma.((x - center)/b) phi_hi)."""

    G: GammaSet
    power: float
    phi_lo: np.ndarray
    phi_hi: np.ndarray
    center: np.ndarray = None
    scale: float = 1.0
    amplitude: float = 1.0

    def __post_init__(self):
        d, N = self.G.d, self.G.N
        center = np.zeros(d) if self.center is None else np.asarray(self.center, dtype=float)
        object.__setattr__(self, "center", _frozen(center))
        object.__setattr__(self, "phi_lo", _frozen(np.asarray(self.phi_lo, dtype=complex)))
        object.__setattr__(self, "phi_hi", _frozen(np.asarray(self.phi_hi, dtype=complex)))
        if self.phi_lo.shape != (N,) or self.phi_hi.shape != (N,) or center.shape != (d,):
            raise ValueError("spinor coefficients must have shape (N,) and center shape (d,)")
        if not self.scale > 0 or not self.amplitude > 0:
            raise ValueError("scale and amplitude must be positive")

    def _local(self, x):
        pts, single = _as_points(x, self.d)
        y = (pts - self.center) / self.scale
        env = 1.0 / (1.0 + np.einsum("nk,nk->n", y, y))
        affine = self.phi_lo + gamma_apply(self.G, y, self.phi_hi)
        return y, env, affine, single

    def jet(self, x):
        pts, single = _as_points(x, self.d)
        value, grad = _kernels.envelope_affine_jet(
            pts, self.center, self.scale, self.amplitude, self.power,
            self.phi_lo, self.phi_hi, self.G.gammas,
        )
        return _out(value, single), _out(grad, single)

    def dirac(self, x) -> np.ndarray:
        """Closed form: -i c env^a / b * (d phi_hi - 2 a env (gamma.y phi_lo + |y|^2 phi_hi))."""
        y, env, _, single = self._local(x)
        c, b, a, d = self.amplitude, self.scale, self.power, self.d
        r2 = np.einsum("nk,nk->n", y, y)
        inner = d * self.phi_hi[None, :] - 2.0 * a * env[:, None] * (
            gamma_apply(self.G, y, self.phi_lo) + r2[:, None] * self.phi_hi
        )
        return _out(-1j * (c * env**a / b)[:, None] * inner, single)

    def modulus_is_radial(self, tol: float = 1e-12) -> bool:
        """True when |field| depends on |x - center| only."""
        cross = [np.vdot(self.phi_lo, g @ self.phi_hi).real for g in self.G.gammas]
        return bool(np.max(np.abs(cross)) <= tol)

    def to_json(self) -> dict:
        return {
            "family": "envelope_affine",
            "d": self.d,
            "power": self.power,
            "center": list(map(float, self.center)),
            "scale": float(self.scale),
            "amplitude": float(self.amplitude),
            "phi_lo": [[z.real, z.imag] for z in self.phi_lo],
            "phi_hi": [[z.real, z.imag] for z in self.phi_hi],
        }

    @classmethod
    def from_json(cls, obj: dict, G: GammaSet) -> "ClosedFormSpinorField":
        if obj.get("family") != "envelope_affine":
            raise ValueError(f"unknown spinor family {obj.get('family')!r}")
        lo = np.array(obj["phi_lo"], dtype=float)
        hi = np.array(obj["phi_hi"], dtype=float)
        return cls(
            G,
            float(obj["power"]),
            lo[:, 0] + 1j * lo[:, 1],
            hi[:, 0] + 1j * hi[:, 1],
            center=np.array(obj["center"], dtype=float),
            scale=float(obj["scale"]),
            amplitude=float(obj["amplitude"]),
        )


def dirac_apply_analytic(f: SpinorField, G: GammaSet, x) -> np.ndarray:
    """gamma.(-i nabla) f at x by exact differentiation."""
    if not isinstance(f, SpinorField):
        raise TypeError(f"unsupported field type {type(f).__name__}")
    if f.G is not G and f.G.d != G.d:
        raise ValueError("field and gamma set dimensions differ")
    return f.dirac(x)


class VectorField:
    d: int

    def value(self, x) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, x) -> np.ndarray:
        return self.value(x)

    def jacobian(self, x) -> np.ndarray:
        raise NotImplementedError(f"{type(self).__name__} has no closed-form jacobian")


@dataclass(frozen=True, eq=False)
class ClosedFormVectorField(VectorField):
    """kappa * b * (b^2 + |u|^2)^-2 * ((b^2 - |u|^2) w + 2 u (w.u) + 2 b M u), u = x - center.

    ``b = 1``, ``center = 0``, ``w = e_1``, ``M = Sigma``, ``kappa = d`` is the
    Loss-Yau potential.
    """

    w: np.ndarray
    M: np.ndarray
    kappa: float
    center: np.ndarray = None
    scale: float = 1.0

    def __post_init__(self):
        w = np.asarray(self.w, dtype=float)
        M = np.asarray(self.M, dtype=float)
        d = w.shape[0]
        center = np.zeros(d) if self.center is None else np.asarray(self.center, dtype=float)
        if M.shape != (d, d) or center.shape != (d,):
            raise ValueError("inconsistent shapes for w, M, center")
        if np.abs(M + M.T).max() > 1e-12:
            raise ValueError("M must be skew-symmetric")
        if not self.scale > 0:
            raise ValueError("scale must be positive")
        object.__setattr__(self, "w", _frozen(w))
        object.__setattr__(self, "M", _frozen(M))
        object.__setattr__(self, "center", _frozen(center))

    @property
    def d(self) -> int:
        return self.w.shape[0]

    def value(self, x) -> np.ndarray:
        pts, single = _as_points(x, self.d)
        u = pts - self.center
        b = self.scale
        r2 = np.einsum("nk,nk->n", u, u)
        wu = u @ self.w
        h = (b * b - r2)[:, None] * self.w + 2.0 * u * wu[:, None] + 2.0 * b * u @ self.M.T
        g = self.kappa * b / (b * b + r2) ** 2
        return _out(g[:, None] * h, single)

    def jacobian(self, x) -> np.ndarray:
        pts, single = _as_points(x, self.d)
        u = pts - self.center
        b, w = self.scale, self.w
        r2 = np.einsum("nk,nk->n", u, u)
        wu = u @ w
        h = (b * b - r2)[:, None] * w + 2.0 * u * wu[:, None] + 2.0 * b * u @ self.M.T
        den = b * b + r2
        g = self.kappa * b / den**2
        dg = (-4.0 * self.kappa * b / den**3)[:, None] * u  # (n, k)
        # dh_i/du_k = -2 u_k w_i + 2 delta_ik (w.u) + 2 u_i w_k + 2 b M_ik
        dh = (
            -2.0 * w[None, :, None] * u[:, None, :]
            + 2.0 * wu[:, None, None] * np.eye(self.d)[None]
            + 2.0 * u[:, :, None] * w[None, None, :]
            + 2.0 * b * self.M[None]
        )
        jac = g[:, None, None] * dh + h[:, :, None] * dg[:, None, :]
        return _out(jac, single)

    def modulus_is_radial(self, tol: float = 1e-10) -> bool:
        d = self.d
        return bool(
            np.abs(self.M @ self.w).max() <= tol
            and np.abs(self.M.T @ self.M + np.outer(self.w, self.w) - np.eye(d)).max() <= tol
        )

    def to_json(self) -> dict:
        return {
            "family": "equality_potential",
            "w": list(map(float, self.w)),
            "M": [list(map(float, row)) for row in self.M],
            "kappa": float(self.kappa),
            "center": list(map(float, self.center)),
            "scale": float(self.scale),
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ClosedFormVectorField":
        if obj.get("family") != "equality_potential":
            raise ValueError(f"unknown vector family {obj.get('family')!r}")
        return cls(
            np.array(obj["w"], dtype=float),
            np.array(obj["M"], dtype=float),
            float(obj["kappa"]),
            center=np.array(obj["center"], dtype=float),
            scale=float(obj["scale"]),
        )


@dataclass(frozen=True, eq=False)
class OffsetVectorField(VectorField):
    """base + constant vector."""

    base: VectorField
    offset: np.ndarray

    @property
    def d(self) -> int:
        return self.base.d

    def value(self, x):
        return self.base.value(x) + np.asarray(self.offset, dtype=float)

    def jacobian(self, x):
        return self.base.jacobian(x)


@dataclass(frozen=True, eq=False)
class ScalarPhase:
    """phi(x) = (alpha + beta.(x - center)) * (1 + |x - center|^2)^(-m)."""

    alpha: float
    beta: np.ndarray
    m: float = 0.0
    center: Optional[np.ndarray] = None

    def __post_init__(self):
        beta = np.asarray(self.beta, dtype=float)
        center = np.zeros_like(beta) if self.center is None else np.asarray(self.center, dtype=float)
        object.__setattr__(self, "beta", _frozen(beta))
        object.__setattr__(self, "center", _frozen(center))

    @property
    def d(self) -> int:
        return self.beta.shape[0]

    def value(self, x) -> np.ndarray:
        pts, single = _as_points(x, self.d)
        u = pts - self.center
        env = 1.0 + np.einsum("nk,nk->n", u, u)
        return _out((self.alpha + u @ self.beta) * env ** (-self.m), single)

    def gradient(self, x) -> np.ndarray:
        pts, single = _as_points(x, self.d)
        u = pts - self.center
        env = 1.0 + np.einsum("nk,nk->n", u, u)
        lin = self.alpha + u @ self.beta
        g = env[:, None] ** (-self.m) * self.beta[None] - (
            2.0 * self.m * lin * env ** (-self.m - 1.0)
        )[:, None] * u
        return _out(g, single)


@dataclass(frozen=True, eq=False)
class RationalRadialScalar:
    """coef * b / (b^2 + |x - center|^2)."""

    coef: float
    center: np.ndarray
    scale: float = 1.0

    @property
    def d(self) -> int:
        return len(self.center)

    def value(self, x) -> np.ndarray:
        pts, single = _as_points(x, self.d)
        u = pts - np.asarray(self.center, dtype=float)
        b = self.scale
        return _out(self.coef * b / (b * b + np.einsum("nk,nk->n", u, u)), single)

    __call__ = value


@dataclass(frozen=True, eq=False)
class GaugedSpinorField(SpinorField):
    """exp(i phi) * base."""

    base: SpinorField
    phase: ScalarPhase

    @property
    def G(self) -> GammaSet:
        return self.base.G

    def jet(self, x):
        pts, single = _as_points(x, self.d)
        v, g = self.base.jet(pts)
        ph = np.exp(1j * self.phase.value(pts))
        dphi = self.phase.gradient(pts)
        value = ph[:, None] * v
        grad = ph[:, None, None] * (g + 1j * dphi[:, :, None] * v[:, None, :])
        return _out(value, single), _out(grad, single)


@dataclass(frozen=True, eq=False)
class GaugedVectorField(VectorField):
    """base + grad phi."""

    base: VectorField
    phase: ScalarPhase

    @property
    def d(self) -> int:
        return self.base.d

    def value(self, x):
        return self.base.value(x) + self.phase.gradient(x)


class SingularPointError(ValueError):
    """Evaluation of an inverted field at the origin."""


def _inversion(pts: np.ndarray):
    r2 = np.einsum("nk,nk->n", pts, pts)
    if np.any(r2 == 0.0):
        raise SingularPointError("inverted fields are singular at x = 0")
    y = pts / r2[:, None]
    d = pts.shape[1]
    # (D Phi)_jk = (delta_jk |x|^2 - 2 x_j x_k) / |x|^4
    jac = (np.eye(d)[None] * r2[:, None, None] - 2.0 * pts[:, :, None] * pts[:, None, :]) / (
        r2**2
    )[:, None, None]
    return r2, y, jac


@dataclass(frozen=True, eq=False)
class InvertedSpinorField(SpinorField):
    """|x|^-d (gamma.x) base(x / |x|^2)."""

    base: SpinorField

    @property
    def G(self) -> GammaSet:
        return self.base.G

    def jet(self, x):
        pts, single = _as_points(x, self.d)
        d = self.d
        r2, y, jac = _inversion(pts)
        v, g = self.base.jet(y)
        pref = r2 ** (-d / 2.0)
        gx_v = gamma_apply(self.G, pts, v)
        value = pref[:, None] * gx_v
        # d/dx_k of base(Phi(x)) = sum_m (d_m base)(Phi) DPhi_mk
        dv = np.einsum("nmb,nmk->nkb", g, jac)
        term1 = (-d * r2 ** (-d / 2.0 - 1.0))[:, None, None] * pts[:, :, None] * gx_v[:, None, :]
        term2 = pref[:, None, None] * np.einsum("kab,nb->nka", self.G.gammas, v)
        term3 = pref[:, None, None] * np.einsum("jab,nj,nkb->nka", self.G.gammas, pts, dv)
        grad = term1 + term2 + term3
        return _out(value, single), _out(grad, single)


@dataclass(frozen=True, eq=False)
class InvertedVectorField(VectorField):
    """(D Phi(x))^T base(Phi(x)) with Phi(x) = x / |x|^2."""

    base: VectorField

    @property
    def d(self) -> int:
        return self.base.d

    def value(self, x):
        pts, single = _as_points(x, self.d)
        _, y, jac = _inversion(pts)
        return _out(np.einsum("njk,nj->nk", jac, self.base.value(y)), single)


@dataclass(frozen=True)
class ZeroModePair:
    psi: SpinorField
    A: VectorField
    phase: Optional[ScalarPhase] = None

    @property
    def G(self) -> GammaSet:
        return self.psi.G

    def residual(self, x) -> np.ndarray:
        """|gamma.(-i nabla - A) psi| at each point."""
        pts, single = _as_points(x, self.psi.d)
        v, g = self.psi.jet(pts)
        r = dirac_from_grad(self.G, g) - gamma_apply(self.G, self.A.value(pts), v)
        return _out(np.linalg.norm(r, axis=-1), single)


def make_sigma(d: int) -> np.ndarray:
    """Zero in the corner, then (d-1)/2 diagonal blocks [[0, -1], [1, 0]]."""
    if d < 3 or d % 2 == 0:
        raise ValueError(f"Sigma is defined for odd d >= 3, got {d}")
    S = np.zeros((d, d))
    for j in range(1, d, 2):
        S[j, j + 1] = -1.0
        S[j + 1, j] = 1.0
    return S


def loss_yau_A(d: int) -> ClosedFormVectorField:
    """d (1+|x|^2)^-2 ((1-|x|^2) e_1 + 2 x_1 x + 2 Sigma x)."""
    e1 = np.zeros(d)
    e1[0] = 1.0
    return ClosedFormVectorField(e1, make_sigma(d), float(d))


def loss_yau_psi(G: GammaSet, v: VacuumSpinor) -> ClosedFormSpinorField:
    """(1+|x|^2)^(-d/2) (1 + i s gamma.x) psi0."""
    if G.d % 2 == 0:
        raise ValueError("the extremal zero mode exists for odd d only")
    psi0 = np.asarray(v.psi0)
    return ClosedFormSpinorField(G, G.d / 2.0, psi0, 1j * v.s * psi0)


def extremal_pair(G: GammaSet, v: VacuumSpinor) -> ZeroModePair:
    return ZeroModePair(loss_yau_psi(G, v), loss_yau_A(G.d))


def transform_pair(pair: ZeroModePair, a, b: float, c: float, L: SpinLift) -> ZeroModePair:
    """(c U* psi(O^-1 (x-a)/b), b^-1 O A(O^-1 (x-a)/b)) for closed-form pairs."""
    psi, A = pair.psi, pair.A
    if not isinstance(psi, ClosedFormSpinorField) or not isinstance(A, ClosedFormVectorField):
        raise TypeError("transform_pair acts on closed-form pairs only")
    a = np.asarray(a, dtype=float)
    O, Ustar = np.asarray(L.O), np.asarray(L.U).conj().T
    if O.shape != (psi.d, psi.d):
        raise ValueError("spin lift dimension does not match the pair")
    new_psi = ClosedFormSpinorField(
        psi.G,
        psi.power,
        Ustar @ psi.phi_lo,
        Ustar @ psi.phi_hi,
        center=a + b * O @ psi.center,
        scale=b * psi.scale,
        amplitude=c * psi.amplitude,
    )
    new_A = ClosedFormVectorField(
        O @ A.w,
        O @ A.M @ O.T,
        A.kappa,
        center=a + b * O @ A.center,
        scale=b * A.scale,
    )
    return ZeroModePair(new_psi, new_A)


def twistor(G: GammaSet, phi0, phi1) -> ClosedFormSpinorField:
    """phi0 + gamma.x phi1."""
    return ClosedFormSpinorField(G, 0.0, phi0, phi1)


@dataclass(frozen=True)
class EqualityData:
    phi0: np.ndarray
    phi1: np.ndarray
    w: np.ndarray
    M: np.ndarray
    s: Optional[int]
    residuals: dict = field(default_factory=dict)
    skew_rank: int = 0
    parity_obstruction: bool = False
    structure_ok: bool = False


def parameter_residuals(G: GammaSet, phi0, phi1) -> dict:
    return {
        "|phi0|-1": abs(np.linalg.norm(phi0) - 1.0),
        "|phi1|-1": abs(np.linalg.norm(phi1) - 1.0),
        "Re<phi0,gamma_j phi1>": float(
            max(abs(np.vdot(phi0, g @ phi1).real) for g in G.gammas)
        ),
    }


def skew_rank(M: np.ndarray, rtol: float = 1e-8) -> int:
    s = np.linalg.svd(M, compute_uv=False)
    return int(np.sum(s > rtol * max(s[0], 1.0))) if s.size else 0


def equality_data(G: GammaSet, phi0, phi1, tol: float = 1e-10, check_tol: float = 1e-9) -> EqualityData:
    """w, M built from (phi0, phi1) and the equality-case structure checks."""
    phi0 = np.asarray(phi0, dtype=complex)
    phi1 = np.asarray(phi1, dtype=complex)
    d = G.d
    pres = parameter_residuals(G, phi0, phi1)
    bad = [k for k, v in pres.items() if v > tol]
    if bad:
        raise ValueError("admissibility conditions violated: " + ", ".join(f"{k}={pres[k]:.3g}" for k in bad))
    g = G.gammas
    w = np.array([np.vdot(phi0, g[j] @ phi1).imag for j in range(d)])
    gg = np.einsum("jab,kbc->jkac", g, g)
    b0 = np.einsum("a,jkab,b->jk", phi0.conj(), gg, phi0).imag
    b1 = np.einsum("a,jkab,b->jk", phi1.conj(), gg, phi1).imag
    M = -0.5 * (b0 + b1)

    eye = np.eye(d)
    res = {
        "Mw": float(np.abs(M @ w).max()),
        "|w|-1": abs(float(np.linalg.norm(w)) - 1.0),
        "MtM+ww-1": float(np.abs(M.T @ M + np.outer(w, w) - eye).max()),
        "-i phi1 - gamma.w phi0": float(np.abs(-1j * phi1 - G.dot(w) @ phi0).max()),
    }
    # gamma.(M y) phi0 = i gamma.y phi0 on an orthonormal basis of w-perp
    wn = np.linalg.norm(w)
    perp = nullspace(w[None, :] / wn) if wn > 1e-12 else eye
    res["gamma.My phi0 - i gamma.y phi0"] = float(
        max(
            np.abs(G.dot(M @ y) @ phi0 - 1j * G.dot(y) @ phi0).max()
            for y in perp.T.real
        )
    )
    res.update(_homogeneity_residuals(G, phi0, phi1, w, M))
    rank = skew_rank(M)
    # kernel of a skew matrix has dimension d - rank, even when d is even
    obstruction = (d - rank) % 2 == 0
    core = ["Mw", "|w|-1", "MtM+ww-1", "-i phi1 - gamma.w phi0", "gamma.My phi0 - i gamma.y phi0"]
    ok = all(res[k] <= check_tol for k in core) and not obstruction
    s_val = np.vdot(phi0, phi1).imag
    s = int(np.sign(s_val)) if abs(abs(s_val) - 1.0) < 1e-8 else None
    return EqualityData(phi0, phi1, w, M, s, res, rank, obstruction, ok)


def _homogeneity_residuals(G, phi0, phi1, w, M) -> dict:
    """Residuals of the degree-0..3 parts of the cubic zero-mode identity."""
    d = G.d
    gw = G.dot(w)
    probes = [np.eye(d)[k] for k in range(d)]
    probes += [np.eye(d)[k] + np.eye(d)[l] for k in range(d) for l in range(k + 1, d)]
    worst = {1: 0.0, 2: 0.0, 3: 0.0}
    for x in probes:
        gx = G.dot(x)
        gMx = G.dot(M @ x)
        r2 = x @ x
        h1 = 1j * gx @ phi0 - gw @ gx @ phi1 - 2.0 * gMx @ phi0
        h2 = -1j * r2 * phi1 - gx @ gw @ gx @ phi0 - 2.0 * gMx @ gx @ phi1
        h3 = 1j * r2 * gx @ phi0 - r2 * gx @ gw @ phi1
        for k, h in ((1, h1), (2, h2), (3, h3)):
            worst[k] = max(worst[k], float(np.abs(h).max()))
    h0 = float(np.abs(-1j * phi1 - gw @ phi0).max())
    return {"homogeneity0": h0, "homogeneity1": worst[1], "homogeneity2": worst[2], "homogeneity3": worst[3]}


def assemble_A(d: int, data: EqualityData, center=None, b: float = 1.0) -> ClosedFormVectorField:
    """The equality-case potential built from (w, M), translated and dilated."""
    if not data.structure_ok:
        failed = {k: v for k, v in data.residuals.items() if not k.startswith("homogeneity")}
        raise ValueError(f"structure equations fail (parity obstruction={data.parity_obstruction}): {failed}")
    return ClosedFormVectorField(data.w, data.M, float(d), center=center, scale=b)


def skew_frame(M: np.ndarray, w: np.ndarray) -> np.ndarray:
    """Orthogonal O with O^T M O = Sigma and O e_1 = w.

    Requires M^T M + w w^T = 1 and M w = 0, so M is a complex structure on
    w-perp.  Schur vectors of M pick the invariant planes; within each plane
    the second column is M applied to the first.
    """
    d = len(w)
    T, Z = scipy.linalg.schur(M, output="real")
    angles = np.abs(np.array([T[i, i + 1] if i + 1 < d else 0.0 for i in range(d)]))
    cols = [np.asarray(w, dtype=float) / np.linalg.norm(w)]
    i = 0
    blocks = []
    while i < d:
        if i + 1 < d and abs(T[i + 1, i]) > 1e-10:
            blocks.append((angles[i], i))
            i += 2
        else:
            i += 1
    blocks.sort(key=lambda t: -t[0])
    for _, i in blocks:
        u = Z[:, i] - sum((Z[:, i] @ c) * c for c in cols)
        u /= np.linalg.norm(u)
        cols.extend([u, M @ u])
    O = np.column_stack(cols)
    return O


def scalar_pair(G: GammaSet, phi0, s: int):
    """(Psi~, Lambda): gamma.(-i nabla) Psi~ = Lambda Psi~ with Lambda = s d / (1 + |x|^2)."""
    phi0 = np.asarray(phi0, dtype=complex)
    if abs(np.linalg.norm(phi0) - 1.0) > 1e-10:
        raise ValueError("phi0 must be a unit spinor")
    if s not in (1, -1):
        raise ValueError("s must be +1 or -1")
    d = G.d
    psi = ClosedFormSpinorField(G, d / 2.0, phi0, 1j * s * phi0)
    lam = RationalRadialScalar(float(s * d), np.zeros(d))
    return psi, lam


def gauge_transform(pair: ZeroModePair, phase: ScalarPhase) -> ZeroModePair:
    if not isinstance(phase, ScalarPhase):
        raise TypeError("gauge phases must be ScalarPhase instances")
    if phase.d != pair.psi.d:
        raise ValueError("phase dimension does not match the pair")
    return ZeroModePair(GaugedSpinorField(pair.psi, phase), GaugedVectorField(pair.A, phase), phase)


def conformal_invert(pair: ZeroModePair, G: GammaSet) -> ZeroModePair:
    if pair.psi.d != G.d:
        raise ValueError("gamma set dimension does not match the pair")
    return ZeroModePair(InvertedSpinorField(pair.psi), InvertedVectorField(pair.A))


def sobolev_candidate(G: GammaSet, phi0, phi1, tol: float = 1e-10) -> ClosedFormSpinorField:
    """(1+|x|^2)^(-d/2) (phi0 + gamma.x phi1) under |phi0| = |phi1|, Re<phi0, gamma_j phi1> = 0."""
    phi0 = np.asarray(phi0, dtype=complex)
    phi1 = np.asarray(phi1, dtype=complex)
    if abs(np.linalg.norm(phi0) - np.linalg.norm(phi1)) > tol:
        raise ValueError("side condition |phi0| = |phi1| fails")
    cross = max(abs(np.vdot(phi0, g @ phi1).real) for g in G.gammas)
    if cross > tol:
        raise ValueError(f"side condition Re<phi0, gamma_j phi1> = 0 fails ({cross:.3g})")
    return ClosedFormSpinorField(G, G.d / 2.0, phi0, phi1)


def random_admissible(G: GammaSet, rng: np.random.Generator):
    """Random unit (phi0, phi1) with Re<phi0, gamma_j phi1> = 0 for every j."""
    N = G.N
    phi0 = rng.standard_normal(N) + 1j * rng.standard_normal(N)
    phi0 /= np.linalg.norm(phi0)
    # real-orthogonal complement of span_R{gamma_j phi0} inside C^N = R^2N
    span = np.array([np.concatenate([(g @ phi0).real, (g @ phi0).imag]) for g in G.gammas])
    z = rng.standard_normal(2 * N)
    q, _ = np.linalg.qr(span.T)
    z -= q @ (q.T @ z)
    phi1 = z[:N] + 1j * z[N:]
    return phi0, phi1 / np.linalg.norm(phi1)


def random_unit_spinor(N: int, rng: np.random.Generator) -> np.ndarray:
    v = rng.standard_normal(N) + 1j * rng.standard_normal(N)
    return v / np.linalg.norm(v)


def sample_points(d: int, n: int, rng: np.random.Generator) -> np.ndarray:
    """Half standard Gaussian, half heavy-tailed (Cauchy radius, uniform direction)."""
    n_core = n - n // 2
    core = rng.standard_normal((n_core, d))
    dirs = rng.standard_normal((n // 2, d))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    radii = np.abs(rng.standard_cauchy(n // 2))
    return np.vstack([core, dirs * radii[:, None]])
