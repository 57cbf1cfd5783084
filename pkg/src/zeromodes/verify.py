"""End-to-end certificates: each check returns a VerificationReport."""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np
import scipy.optimize

from . import _kernels
from .calculus import (
    QuadratureScheme,
    integrate,
    lp_norm,
    penrose_components,
    sobolev_constant,
    sphere_area,
)
from .clifford import (
    GammaSet,
    SpinLift,
    VacuumSpinor,
    spin_lift,
    vacuum_residual,
)
from .fields import (
    ClosedFormSpinorField,
    ClosedFormVectorField,
    GaugedSpinorField,
    InvertedSpinorField,
    InvertedVectorField,
    SpinorField,
    VectorField,
    ZeroModePair,
    _as_points,
    dirac_from_grad,
    equality_data,
    extremal_pair,
    gamma_apply,
    sample_points,
    scalar_pair,
    skew_frame,
    transform_pair,
)

SCHEMA = 1
# equality-case sweep for the chain limits; see extrapolate()
LIMIT_SWEEP = (1e-4, 1e-5, 1e-6, 1e-7, 1e-8)
LIMIT_RADIAL_ORDER = 1600
EQUALITY_RTOL = 1e-6

Number = Union[float, list]


@dataclass
class VerificationReport:
    claim: str
    computed: Number
    target: Union[float, str]
    tolerance: float
    passed: bool
    metadata: dict = field(default_factory=dict)

    @classmethod
    def quantitative(cls, claim, computed, target, tolerance, **metadata) -> "VerificationReport":
        """pass iff |computed - target| <= tolerance * max(1, |target|), componentwise."""
        c = np.atleast_1d(np.asarray(computed, dtype=float))
        ok = bool(np.all(np.abs(c - target) <= tolerance * max(1.0, abs(target))))
        return cls(claim, _plain(computed), float(target), float(tolerance), ok, metadata)

    @classmethod
    def combine(cls, claim, parts: Sequence["VerificationReport"], **metadata) -> "VerificationReport":
        """A property claim that holds iff every part passes."""
        metadata["checks"] = [p.to_dict() for p in parts]
        computed = [p.computed for p in parts if not isinstance(p.computed, list)]
        tol = min(p.tolerance for p in parts) if parts else 0.0
        return cls(claim, computed, "property", tol, all(p.passed for p in parts), metadata)

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA,
            "claim": self.claim,
            "computed": _plain(self.computed),
            "target": self.target,
            "tolerance": self.tolerance,
            "pass": self.passed,
            "metadata": _plain(self.metadata),
        }


def _plain(obj):
    """numpy scalars and arrays to JSON-ready python objects."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return [[float(z.real), float(z.imag)] for z in obj.ravel()]
        return _plain(obj.tolist())
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


class ObstructionError(ValueError):
    """No equality case exists (rank-parity obstruction in even dimensions)."""


class PreconditionError(ValueError):
    """The input is not an equality case."""


# ---------------------------------------------------------------- radial detection


def _modulus_center(f) -> Optional[np.ndarray]:
    """Center about which |f| is radial, or None when that is not known in closed form."""
    if isinstance(f, (ClosedFormSpinorField, ClosedFormVectorField)):
        return np.asarray(f.center) if f.modulus_is_radial() else None
    if isinstance(f, GaugedSpinorField):
        return _modulus_center(f.base)
    if isinstance(f, (InvertedSpinorField, InvertedVectorField)):
        c = _modulus_center(f.base)
        # |f~(x)| = |x|^(1-d) |f(x/|x|^2)| for spinors, |x|^-2 |A(x/|x|^2)| for vectors
        return c if c is not None and not np.any(c) else None
    return None


def _densities_center(psi) -> Optional[np.ndarray]:
    """Center about which all identity densities are radial.

    A closed-form field is env(r)^a times a twistor spinor Phi; when |Phi| is
    radial, the Penrose, Dirac and modulus densities of any radial multiple
    of Phi depend on r only.
    """
    if isinstance(psi, ClosedFormSpinorField):
        return _modulus_center(psi)
    return None


def _norm(f, p, scheme) -> float:
    c = _modulus_center(f)
    return lp_norm(f, p, scheme, radial=c is not None, center=c)


# ---------------------------------------------------------------- constants


def sharp_constant_ratio(A: VectorField, scheme: QuadratureScheme, tol: float = 1e-8) -> VerificationReport:
    """||A||_d^2 / S_d against d/(d-2)."""
    t0 = time.perf_counter()
    d = A.d
    val = _norm(A, d, scheme) ** 2 / sobolev_constant(d)
    return VerificationReport.quantitative(
        f"sharp_constant_ratio[d={d}]", val, d / (d - 2.0), tol,
        scheme=scheme.to_json(), wall_time=time.perf_counter() - t0,
    )


def calibration(scheme: QuadratureScheme, radial: bool, tol: float) -> VerificationReport:
    """int (1+|x|^2)^-d = 2^-d |S^d|."""
    t0 = time.perf_counter()
    d = scheme.d
    val = integrate(lambda x: (1.0 + np.einsum("nk,nk->n", x, x)) ** (-d), scheme, radial=radial)
    target = 2.0 ** (-d) * sphere_area(d)
    rel = abs(val / target - 1.0)
    return VerificationReport.quantitative(
        f"calibration[d={d},{'radial' if radial else 'product'}]", rel, 0.0, tol,
        value=val, exact=target, scheme=scheme.to_json(), wall_time=time.perf_counter() - t0,
    )


# ---------------------------------------------------------------- zero modes


def check_zero_mode(pair: ZeroModePair, points, tol: float = 1e-11) -> VerificationReport:
    """Max residual of gamma.(-i nabla - A) psi, measured against max(1, local field scale).

    The local scale is |gamma.(-i nabla) psi| + |A||psi|; it only matters where
    fields are large (e.g. near the origin for inverted pairs).
    """
    pts, _ = _as_points(points, pair.psi.d)
    v, g = pair.psi.jet(pts)
    dirac = dirac_from_grad(pair.G, g)
    Av = pair.A.value(pts)
    res = np.linalg.norm(dirac - gamma_apply(pair.G, Av, v), axis=-1)
    scale = np.linalg.norm(dirac, axis=-1) + np.linalg.norm(Av, axis=-1) * np.linalg.norm(v, axis=-1)
    rel = res / np.maximum(1.0, scale)
    return VerificationReport.quantitative(
        f"zero_mode[d={pair.psi.d}]", float(rel.max()), 0.0, tol,
        absolute_residual=float(res.max()), points=len(pts),
    )


# ---------------------------------------------------------------- extrapolation


def extrapolation_exponents(d: int, n_points: int) -> list[float]:
    """Exponents k/(d-1), k = d-2, d-1, ..., for the small-eps model.

    The defect of the extremal pair behaves like a power series in
    eps^(1/(d-1)) whose first nonconstant term has order eps^((d-2)/(d-1)).
    """
    return [k / (d - 1.0) for k in range(d - 2, d - 2 + n_points - 1)]


def extrapolate(eps, values, d: int):
    """Value at eps = 0 from an exact fit of c0 + sum_k c_k eps^(e_k).

    Returns (limit, metadata) where the metadata records the model.
    """
    eps = np.asarray(eps, dtype=float)
    values = np.asarray(values, dtype=float)
    ex = extrapolation_exponents(d, len(eps))
    V = np.column_stack([np.ones_like(eps)] + [eps**e for e in ex])
    coef = np.linalg.solve(V, values)
    return float(coef[0]), {"model": "power series in eps^(1/(d-1))", "exponents": ex}


def _check_sweep(eps) -> list[float]:
    eps = [float(e) for e in eps]
    if any(not e > 0 for e in eps):
        raise ValueError("eps values must be positive")
    if any(b >= a for a, b in zip(eps, eps[1:])):
        raise ValueError("eps sweep must be strictly decreasing")
    return eps


# ---------------------------------------------------------------- identity


def check_identity_prop(psi: SpinorField, G: GammaSet, eps, scheme: QuadratureScheme,
                        tol: float = 1e-6) -> Union[VerificationReport, list]:
    """LHS = int sum_j |P_j(psi/|psi|_e^(d/(d-1)))|^2 |psi|_e^2 against
    RHS = (d-1)/d int |gamma.grad psi|^2 |psi|_e^(-2/(d-1))
          - (d-1)/(d-2)^2 int |grad |psi|_e^((d-2)/(d-1))|^2 [2(d-1) - d |psi|^2/|psi|_e^2].

    ``eps`` may be a float or a sequence; a sequence gives one report per value.
    """
    many = np.ndim(eps) > 0
    eps_list = [float(e) for e in np.atleast_1d(eps)]
    if any(not e > 0 for e in eps_list):
        raise ValueError("eps must be positive")
    if psi.G.d != G.d:
        raise ValueError("field and gamma set dimensions differ")
    d = G.d
    t0 = time.perf_counter()
    gammas = psi.G.gammas
    m = len(eps_list)

    def f(x):
        v, g = psi.jet(x)
        cols = []
        for e in eps_list:
            D = _kernels.identity_densities(v, g, gammas, e)
            ratio = D[:, 3] / (D[:, 3] + e * e)
            cols.append(np.stack([D[:, 0], D[:, 1], D[:, 2] * (2.0 * (d - 1) - d * ratio)], axis=1))
        return np.concatenate(cols, axis=1)

    c = _densities_center(psi)
    # non-radial closed-form fields are still best integrated about their envelope center
    center = c if c is not None else getattr(psi, "center", None)
    I = np.asarray(integrate(f, scheme, radial=c is not None, center=center)).reshape(m, 3)
    wall = time.perf_counter() - t0
    reports = []
    for e, (lhs, dir_term, grad_term) in zip(eps_list, I):
        rhs = (d - 1.0) / d * dir_term - (d - 1.0) / (d - 2.0) ** 2 * grad_term
        rel = abs(lhs - rhs) / max(lhs, rhs, 1.0)
        reports.append(VerificationReport.quantitative(
            f"identity[d={d},eps={e:g}]", rel, 0.0, tol,
            lhs=lhs, rhs=rhs, eps=e, radial_fast_path=c is not None,
            scheme=scheme.to_json(), wall_time=wall,
        ))
    return reports if many else reports[0]


# ---------------------------------------------------------------- inequality chain


@dataclass(frozen=True)
class EqualityChainTerms:
    eps: float
    P_eps: float
    R_eps: float
    R1_eps: float
    R2_eps: float
    S_eps: float

    @property
    def balance(self) -> float:
        """R + P + R1 + R2 - S; zero for zero modes up to quadrature error."""
        return self.R_eps + self.P_eps + self.R1_eps + self.R2_eps - self.S_eps

    def as_tuple(self):
        return (self.P_eps, self.R_eps, self.R1_eps, self.R2_eps, self.S_eps)


def _chain_integrals(pair: ZeroModePair, eps_list, scheme):
    """Raw integrals per eps: Penrose, R-density, Hoelder mass, |A|^2 weight, grad, Sobolev mass."""
    psi, A = pair.psi, pair.A
    d = psi.d
    qq = (d - 2.0) / (d - 1.0)
    p = 2.0 * d / (d - 2.0)
    gammas = psi.G.gammas

    def f(x):
        v, g = psi.jet(x)
        a2 = np.einsum("nk,nk->n", A.value(x), A.value(x))
        cols = []
        for e in eps_list:
            D = _kernels.identity_densities(v, g, gammas, e)
            mod2 = D[:, 3]
            me2 = mod2 + e * e
            me = np.sqrt(me2)
            cols.append(np.stack([
                D[:, 0],
                D[:, 2] * e * e / me2,
                mod2 ** (d / (d - 2.0)) * me ** (-2.0 * d / ((d - 1.0) * (d - 2.0))),
                a2 * mod2 * me ** (-2.0 / (d - 1.0)),
                D[:, 2],
                np.maximum(me**qq - e**qq, 0.0) ** p,
            ], axis=1))
        return np.concatenate(cols, axis=1)

    cpsi = _densities_center(psi)
    cA = _modulus_center(A)
    radial = cpsi is not None and cA is not None and np.allclose(cpsi, cA, atol=0, rtol=0)
    I = np.asarray(integrate(f, scheme, radial=radial, center=cpsi if radial else None))
    return I.reshape(len(eps_list), 6), radial


def _chain_scheme(pair: ZeroModePair, scheme: Optional[QuadratureScheme]) -> QuadratureScheme:
    if scheme is not None:
        return scheme
    return QuadratureScheme(pair.psi.d, LIMIT_RADIAL_ORDER)


def equality_chain_terms(pair: ZeroModePair, G: GammaSet, eps,
                         scheme: Optional[QuadratureScheme] = None, A_norm2: Optional[float] = None):
    """P, R, R1, R2, S at one eps (or a list of them for a sequence)."""
    many = np.ndim(eps) > 0
    eps_list = [float(e) for e in np.atleast_1d(eps)]
    if any(not e > 0 for e in eps_list):
        raise ValueError("eps must be positive")
    if pair.psi.d != G.d:
        raise ValueError("pair and gamma set dimensions differ")
    d = G.d
    scheme = _chain_scheme(pair, scheme)
    if A_norm2 is None:
        A_norm2 = _norm(pair.A, d, scheme) ** 2
    Sd = sobolev_constant(d)
    I, _ = _chain_integrals(pair, eps_list, scheme)
    e_exp = (d - 2.0) / d
    out = []
    for e, (pen, rden, hmass, aw, grad, smass) in zip(eps_list, I):
        R = d * (d - 1.0) / (d - 2.0) ** 2 * rden
        holder = A_norm2 * hmass**e_exp
        sob = Sd * smass**e_exp
        R1 = (d - 1.0) / d * (holder - aw)
        R2 = (d - 1.0) / (d - 2.0) * (grad - sob)
        S = (d - 1.0) / d * holder - (d - 1.0) / (d - 2.0) * sob
        out.append(EqualityChainTerms(e, pen, R, R1, R2, S))
    return out if many else out[0]


def s_limit_target(A_norm2: float, psi_mass: float, d: int) -> float:
    """((d-1)/d ||A||_d^2 - (d-1)/(d-2) S_d) (int |psi|^(2d/(d-1)))^((d-2)/d)."""
    return ((d - 1.0) / d * A_norm2 - (d - 1.0) / (d - 2.0) * sobolev_constant(d)) * psi_mass ** (
        (d - 2.0) / d
    )


def equality_chain_limits(pair: ZeroModePair, G: GammaSet, sweep=LIMIT_SWEEP,
                          scheme: Optional[QuadratureScheme] = None, tol: float = 1e-5,
                          s_tol: Optional[float] = None) -> VerificationReport:
    """Extrapolated eps -> 0 limits of the chain terms and of S against its limit formula.

    The first four limits are compared with 0 at ``tol``; the S limit with
    the limit formula at ``s_tol`` (default ``tol``), relative when the
    target exceeds one and absolute otherwise.
    """
    t0 = time.perf_counter()
    eps = _check_sweep(sweep)
    d = G.d
    scheme = _chain_scheme(pair, scheme)
    A_norm2 = _norm(pair.A, d, scheme) ** 2
    psi_mass = _norm(pair.psi, 2.0 * d / (d - 1.0), scheme) ** (2.0 * d / (d - 1.0))
    terms = equality_chain_terms(pair, G, eps, scheme, A_norm2=A_norm2)
    table = np.array([t.as_tuple() for t in terms])
    names = ["P", "R", "R1", "R2", "S"]
    limits = {}
    model = None
    for i, n in enumerate(names):
        limits[n], model = extrapolate(eps, table[:, i], d)
    target = s_limit_target(A_norm2, psi_mass, d)
    s_tol = tol if s_tol is None else s_tol
    meta = dict(
        eps=eps, terms={n: table[:, i].tolist() for i, n in enumerate(names)},
        limits=limits, extrapolation=model, balance=[t.balance for t in terms],
        A_norm2=A_norm2, psi_mass=psi_mass, scheme=scheme.to_json(),
    )
    parts = [
        VerificationReport.quantitative(f"chain_limit_{n}[d={d}]", limits[n], 0.0, tol)
        for n in names[:4]
    ]
    parts.append(VerificationReport.quantitative(f"chain_limit_S[d={d}]", limits["S"], target, s_tol))
    meta["wall_time"] = time.perf_counter() - t0
    return VerificationReport.combine(f"equality_chain[d={d}]", parts, **meta)


def inequality_chain(pair: ZeroModePair, scheme: Optional[QuadratureScheme] = None,
                     sweep=LIMIT_SWEEP, tol: float = 1e-6) -> VerificationReport:
    """Sobolev side (S_d/(d-2)) (int (|psi|_e^qq - e^qq)^(2d/(d-2)))^((d-2)/d) against the
    Hoelder side (||A||_d^2/d) (int |psi|^(2d/(d-1)))^((d-2)/d).

    Passes when the Sobolev side stays below the Hoelder side at every eps,
    increases as eps decreases, and its extrapolated limit does not exceed
    the Hoelder side; ``limit_ratio`` in the metadata is 1 for equality cases.
    """
    t0 = time.perf_counter()
    eps = _check_sweep(sweep)
    d = pair.psi.d
    scheme = _chain_scheme(pair, scheme)
    e_exp = (d - 2.0) / d
    A_norm2 = _norm(pair.A, d, scheme) ** 2
    psi_mass = _norm(pair.psi, 2.0 * d / (d - 1.0), scheme) ** (2.0 * d / (d - 1.0))
    I, radial = _chain_integrals(pair, eps, scheme)
    sob = sobolev_constant(d) / (d - 2.0) * I[:, 5] ** e_exp
    hold = A_norm2 / d * psi_mass**e_exp
    limit, model = extrapolate(eps, sob, d)
    ratio = limit / hold
    below = bool(np.all(sob <= hold * (1.0 + tol)))
    monotone = bool(np.all(np.diff(I[:, 5]) >= 0.0))
    ok = below and monotone and ratio <= 1.0 + tol
    return VerificationReport(
        f"inequality_chain[d={d}]", [float(ratio)], "property", tol, ok,
        dict(eps=eps, sobolev_side=sob.tolist(), holder_side=hold, limit=limit, limit_ratio=ratio,
             below=below, monotone=monotone, extrapolation=model, radial_fast_path=radial,
             scheme=scheme.to_json(), wall_time=time.perf_counter() - t0),
    )


# ---------------------------------------------------------------- twistor


def twistor_residual(Phi: SpinorField, points) -> float:
    pts, _ = _as_points(points, Phi.d)
    return float(np.abs(penrose_components(Phi, pts)).max())


def recover_twistor(Phi: SpinorField, origin=None):
    """(phi0, phi1) with Phi(x) = phi0 + gamma.(x - origin) phi1, from the jet at ``origin``."""
    d = Phi.d
    origin = np.zeros(d) if origin is None else np.asarray(origin, dtype=float)
    v, g = Phi.jet(origin)
    # d_j Phi = gamma_j phi1, so phi1 = (1/d) sum_j gamma_j d_j Phi
    phi1 = np.einsum("jab,jb->a", Phi.G.gammas, g) / d
    return v, phi1


def check_twistor(Phi: SpinorField, G: GammaSet, points, tol: float = 1e-11) -> VerificationReport:
    """Twistor residual plus the affine reconstruction from the jet at 0.

    Reconstruction errors are measured relative to 1 + |x|.
    """
    if Phi.G.d != G.d:
        raise ValueError("field and gamma set dimensions differ")
    pts, _ = _as_points(points, G.d)
    res = twistor_residual(Phi, pts)
    phi0, phi1 = recover_twistor(Phi)
    recon = phi0 + gamma_apply(G, pts, phi1)
    err = np.linalg.norm(Phi(pts) - recon, axis=-1) / (1.0 + np.linalg.norm(pts, axis=1))
    parts = [
        VerificationReport.quantitative(f"twistor_residual[d={G.d}]", res, 0.0, tol),
        VerificationReport.quantitative(f"twistor_reconstruction[d={G.d}]", float(err.max()), 0.0, tol),
    ]
    return VerificationReport.combine(
        f"twistor[d={G.d}]", parts, phi0=phi0, phi1=phi1,
        norms=[float(np.linalg.norm(phi0)), float(np.linalg.norm(phi1))],
        cross=float(max(abs(np.vdot(phi0, g @ phi1).real) for g in G.gammas)),
        points=len(pts),
    )


# ---------------------------------------------------------------- classification


@dataclass(frozen=True)
class Classification:
    a: np.ndarray
    b: float
    c: float
    O: np.ndarray
    U: np.ndarray
    psi0: np.ndarray
    s: int
    rebuild_error: float
    vacuum_residual: float

    def rebuild(self, G: GammaSet) -> ZeroModePair:
        base = extremal_pair(G, VacuumSpinor(self.psi0, self.s))
        return transform_pair(base, self.a, self.b, self.c, SpinLift(self.O, self.U))

    def to_json(self) -> dict:
        return _plain({
            "a": self.a, "b": self.b, "c": self.c, "O": self.O, "U": self.U.ravel(),
            "psi0": self.psi0, "s": self.s,
            "rebuild_error": self.rebuild_error, "vacuum_residual": self.vacuum_residual,
        })


def _peak(psi: ClosedFormSpinorField) -> np.ndarray:
    a = np.asarray(psi.center, dtype=float)
    v, g = psi.jet(a)
    grad_mod2 = 2.0 * np.einsum("a,ka->k", v.conj(), g).real
    if np.abs(grad_mod2).max() > 1e-10 * max(1.0, float(np.vdot(v, v).real)):
        raise PreconditionError("|psi| is not stationary at the envelope center")
    return a


def _half_radius(psi: SpinorField, a: np.ndarray, c: float) -> float:
    d = psi.d
    e = np.zeros(d)
    e[0] = 1.0
    level = 2.0 ** (-(d - 1) / 2.0)

    def f(r):
        return np.linalg.norm(psi(a + r * e)) / c - level

    hi = 1.0
    while f(hi) > 0.0:
        hi *= 2.0
        if hi > 1e12:
            raise PreconditionError("|psi| does not decay along e_1")
    return scipy.optimize.brentq(f, 0.0, hi, xtol=1e-15, rtol=4 * np.finfo(float).eps)


def classify_equality(pair: ZeroModePair, G: GammaSet, scheme: Optional[QuadratureScheme] = None,
                      tol: float = 1e-9, points: int = 200, seed: int = 0) -> Classification:
    """Recover (a, b, c, O, U, psi0) with pair = transform_pair(extremal(psi0), a, b, c, (O, U)).

    O is determined up to the stabilizer of (w, M); the round trip is judged
    on the rebuilt fields.
    """
    d = G.d
    if d % 2 == 0:
        raise ObstructionError(
            f"d={d} is even: a skew d x d matrix has even rank, so its kernel cannot be "
            "one-dimensional and no equality case exists"
        )
    psi, A = pair.psi, pair.A
    if not isinstance(psi, ClosedFormSpinorField) or not isinstance(A, ClosedFormVectorField):
        raise PreconditionError("classification needs a closed-form pair")
    scheme = scheme or QuadratureScheme(d, 400)
    ratio = _norm(A, d, scheme) ** 2 / (d / (d - 2.0) * sobolev_constant(d))
    if abs(ratio - 1.0) > EQUALITY_RTOL:
        raise PreconditionError(f"||A||_d^2 / (d/(d-2) S_d) = {ratio:.12g}, not an equality case")

    a = _peak(psi)
    c = float(np.linalg.norm(psi(a)))
    b = float(_half_radius(psi, a, c))

    # Phi = chi / |chi|^(d/(d-1)) for chi(y) = psi(a + b y) / c, evaluated at y = 0
    v, g = psi.jet(a)
    v = v / c
    g = g * (b / c)
    q = d / (d - 1.0)
    m = np.linalg.norm(v)
    re = np.einsum("a,ka->k", v.conj(), g).real
    phi0 = v * m ** (-q)
    dphi = m ** (-q) * g - q * m ** (-q - 2.0) * re[:, None] * v[None, :]
    phi1 = np.einsum("jab,jb->a", G.gammas, dphi) / d

    data = equality_data(G, phi0, phi1)
    if data.parity_obstruction:
        raise ObstructionError(f"rank parity obstruction: rank M = {data.skew_rank} in d={d}")
    if not data.structure_ok or data.s is None:
        raise PreconditionError(f"structure equations fail: {data.residuals}")
    O = skew_frame(data.M, data.w)
    L = spin_lift(G, O)
    psi0 = L.U @ phi0
    result = Classification(a, b, c, O, L.U, psi0, data.s, 0.0, vacuum_residual(G, psi0))
    rebuilt = result.rebuild(G)
    pts = sample_points(d, points, np.random.default_rng(seed)) * b + a
    err_psi = np.abs(rebuilt.psi(pts) - psi(pts)).max() / c
    err_A = np.abs(rebuilt.A.value(pts) - A.value(pts)).max() * b
    err = float(max(err_psi, err_A))
    if err > tol:
        raise PreconditionError(f"rebuilt pair differs from the input by {err:.3g}")
    return Classification(a, b, c, O, L.U, psi0, data.s, err, result.vacuum_residual)


def classification_report(pair: ZeroModePair, G: GammaSet, tol: float = 1e-9,
                          vacuum_tol: float = 1e-11, **kw) -> VerificationReport:
    cl = classify_equality(pair, G, tol=np.inf, **kw)
    parts = [
        VerificationReport.quantitative(f"classify_rebuild[d={G.d}]", cl.rebuild_error, 0.0, tol),
        VerificationReport.quantitative(f"classify_vacuum[d={G.d}]", cl.vacuum_residual, 0.0, vacuum_tol),
    ]
    return VerificationReport.combine(f"classify[d={G.d}]", parts, parameters=cl.to_json())


# ---------------------------------------------------------------- scalar case


def check_scalar_equality(G: GammaSet, phi0, s: int, scheme: QuadratureScheme, points=None,
                          tol: float = 1e-12, norm_tol: float = 1e-8, seed: int = 0) -> VerificationReport:
    """gamma.(-i nabla) Psi~ = Lambda Psi~ pointwise and ||Lambda||_d^2 = d/(d-2) S_d."""
    d = G.d
    psi, lam = scalar_pair(G, phi0, s)
    if points is None:
        points = sample_points(d, 200, np.random.default_rng(seed))
    pts, _ = _as_points(points, d)
    v, g = psi.jet(pts)
    res = np.linalg.norm(dirac_from_grad(G, g) - lam.value(pts)[:, None] * v, axis=-1).max()
    norm2 = integrate(lambda x: np.abs(lam.value(x)) ** d, scheme, radial=True) ** (2.0 / d)
    target = d / (d - 2.0) * sobolev_constant(d)
    parts = [
        VerificationReport.quantitative(f"scalar_equation[d={d}]", float(res), 0.0, tol),
        VerificationReport.quantitative(f"scalar_norm[d={d}]", norm2 / target, 1.0, norm_tol),
    ]
    return VerificationReport.combine(f"scalar[d={d},s={s:+d}]", parts, lambda_norm2=norm2,
                                      lambda_at_0=float(lam.value(np.zeros(d))))


# ---------------------------------------------------------------- divergence


def divergence_weighted(A: VectorField, points) -> np.ndarray:
    """div(|A|^(d-2) A) = |A|^(d-2) tr J + (d-2) |A|^(d-4) A.J A, with J = dA/dx."""
    d = A.d
    pts, _ = _as_points(points, d)
    try:
        J = A.jacobian(pts)
    except NotImplementedError as exc:
        raise ValueError("the divergence check needs a potential with an analytic jacobian") from exc
    v = A.value(pts)
    n2 = np.einsum("ni,ni->n", v, v)
    tr = np.einsum("nii->n", J)
    aja = np.einsum("ni,nik,nk->n", v, J, v)
    return n2 ** ((d - 2) / 2.0) * tr + (d - 2) * n2 ** ((d - 4) / 2.0) * aja


def check_divergence_condition(A: VectorField, points, tol: float = 1e-10) -> VerificationReport:
    div = divergence_weighted(A, points)
    return VerificationReport.quantitative(
        f"divergence[d={A.d}]", float(np.abs(div).max()), 0.0, tol, points=len(div)
    )


# ---------------------------------------------------------------- symmetries


def check_symmetry(original: ZeroModePair, image: ZeroModePair, scheme: QuadratureScheme, points,
                   name: str, tol: float = 1e-8, residual_tol: float = 1e-11,
                   undo_gauge: bool = False) -> VerificationReport:
    """Zero-mode residual of the image and preservation of ||psi||_(2d/(d-1)) and ||A||_d.

    With ``undo_gauge`` the image potential is compared after subtracting the
    gradient of its recorded phase, since ||A + grad phi||_d itself is not
    gauge invariant.
    """
    d = original.psi.d
    p = 2.0 * d / (d - 1.0)
    n_psi0, n_psi1 = _norm(original.psi, p, scheme), _norm(image.psi, p, scheme)
    A1 = image.A
    if undo_gauge:
        if image.phase is None:
            raise ValueError("image has no recorded gauge phase")
        phase = image.phase
        A1 = _Shifted(image.A, phase)
    n_A0, n_A1 = _norm(original.A, d, scheme), _norm(A1, d, scheme)
    parts = [
        check_zero_mode(image, points, residual_tol),
        VerificationReport.quantitative(f"{name}_psi_norm[d={d}]", n_psi1 / n_psi0, 1.0, tol),
        VerificationReport.quantitative(f"{name}_A_norm[d={d}]", n_A1 / n_A0, 1.0, tol),
    ]
    meta = dict(psi_norms=[n_psi0, n_psi1], A_norms=[n_A0, n_A1], scheme=scheme.to_json())
    if undo_gauge:
        meta["gauged_A_norm"] = _norm(image.A, d, scheme)
    return VerificationReport.combine(f"{name}[d={d}]", parts, **meta)


@dataclass(frozen=True, eq=False)
class _Shifted(VectorField):
    """A - grad phi."""

    base: VectorField
    phase: object

    @property
    def d(self) -> int:
        return self.base.d

    def value(self, x):
        return self.base.value(x) - self.phase.gradient(x)


def reports_to_json(reports: Sequence[VerificationReport]) -> list:
    """JSON array of report objects, keyed and ordered by claim id."""
    return [r.to_dict() for r in sorted(reports, key=lambda r: r.claim)]
