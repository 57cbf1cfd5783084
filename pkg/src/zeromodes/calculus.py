"""Quadrature over R^d, L^p norms, the Sobolev constant and Penrose components."""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Optional

import numpy as np
import scipy.special

from . import _kernels
from .clifford import GammaSet
from .fields import (
    SpinorField,
    VectorField,
    _as_points,
    _out,
    dirac_from_grad,
)

CHUNK = 1 << 16


class QuadratureError(ArithmeticError):
    """Non-finite integrand value at a quadrature node."""


def sphere_area(n: int) -> float:
    """|S^n|, the surface area of the unit n-sphere in R^(n+1)."""
    return 2.0 * math.pi ** ((n + 1) / 2.0) / math.gamma((n + 1) / 2.0)


def default_angular_order(d: int) -> int:
    """Per-axis order of the spherical rule; keeps a full-rule pass near 1e7 nodes."""
    if d <= 3:
        return 48
    if d <= 5:
        return 14
    return 4


@lru_cache(maxsize=32)
def _radial_rule(d: int, order: int):
    t, wt = np.polynomial.legendre.leggauss(order)
    t = 0.5 * (t + 1.0)
    wt = 0.5 * wt
    r = t / (1.0 - t)
    w = wt * r ** (d - 1) / (1.0 - t) ** 2
    return r, w


@lru_cache(maxsize=32)
def _angular_rule(d: int, order: int):
    """Product rule on S^(d-1): Gauss-Jacobi in cos(theta_k), trapezoid in the azimuth."""
    n_phi = 2 * order
    phi = 2.0 * math.pi * np.arange(n_phi) / n_phi
    dirs = np.stack([np.cos(phi), np.sin(phi)], axis=1)
    weights = np.full(n_phi, 2.0 * math.pi / n_phi)
    # add polar angles one at a time: S^(m-1) -> S^m with weight sin^(m-1) theta
    for m in range(2, d):
        alpha = (m - 2) / 2.0
        if alpha == 0.0:
            t, wt = np.polynomial.legendre.leggauss(order)
        else:
            t, wt = scipy.special.roots_jacobi(order, alpha, alpha)
        sin_t = np.sqrt(1.0 - t * t)
        new_dirs = np.concatenate(
            [t[:, None, None].repeat(len(dirs), 1), sin_t[:, None, None] * dirs[None]], axis=2
        ).reshape(-1, m + 1)
        weights = (wt[:, None] * weights[None]).reshape(-1)
        dirs = new_dirs
    return dirs, weights


@dataclass(frozen=True)
class QuadratureScheme:
    """Compactified product rule: radius r = t/(1-t) with Gauss-Legendre in t, times a
    spherical product rule.  ``fast_path`` lets radial integrands skip the sphere."""

    d: int
    radial_order: int = 80
    angular_order: Optional[int] = None
    fast_path: bool = True

    def __post_init__(self):
        if self.d < 2:
            raise ValueError("quadrature needs d >= 2")
        if self.angular_order is None:
            object.__setattr__(self, "angular_order", default_angular_order(self.d))

    def radial(self):
        return _radial_rule(self.d, self.radial_order)

    def angular(self):
        return _angular_rule(self.d, self.angular_order)

    @property
    def node_count(self) -> int:
        return self.radial_order * len(self.angular()[1])

    def with_orders(self, radial_order=None, angular_order=None) -> "QuadratureScheme":
        return QuadratureScheme(
            self.d,
            radial_order or self.radial_order,
            angular_order or self.angular_order,
            self.fast_path,
        )

    def to_json(self) -> dict:
        return {
            "d": self.d,
            "radial_order": self.radial_order,
            "angular_order": self.angular_order,
            "fast_path": self.fast_path,
            "nodes": self.node_count,
        }


def _check_finite(vals: np.ndarray, pts: np.ndarray):
    bad = ~np.isfinite(vals)
    if np.any(bad):
        row = np.argwhere(bad)[0][0]
        raise QuadratureError(f"non-finite integrand at node {pts[row].tolist()}")


def _accumulate(f, pts, w, chunk=CHUNK):
    partials = []
    for i in range(0, len(w), chunk):
        p = pts[i : i + chunk]
        vals = np.asarray(f(p), dtype=float)
        _check_finite(vals, p)
        partials.append(np.tensordot(w[i : i + chunk], vals, axes=(0, 0)))
    parts = np.array(partials)
    if parts.ndim == 1:
        return math.fsum(parts)
    return np.array([math.fsum(col) for col in parts.T])


def integrate(f: Callable, scheme: QuadratureScheme, radial: bool = False, center=None):
    """Integral of ``f`` over R^d.

    ``f`` maps an (n, d) array of points to (n,) or (n, m) values; the result is
    a float or an (m,) array.  ``radial=True`` asserts that ``f`` depends only
    on ``|x - center|`` and uses the exact one-dimensional reduction.
    """
    d = scheme.d
    center = np.zeros(d) if center is None else np.asarray(center, dtype=float)
    r, wr = scheme.radial()
    if radial and scheme.fast_path:
        pts = center + r[:, None] * np.eye(d)[0]
        return sphere_area(d - 1) * _accumulate(f, pts, wr)
    dirs, wa = scheme.angular()
    partials = []
    # one radial shell at a time keeps memory bounded
    for ri, wri in zip(r, wr):
        partials.append(wri * _accumulate(f, center + ri * dirs, wa))
    parts = np.array(partials)
    if parts.ndim == 1:
        return math.fsum(parts)
    return np.array([math.fsum(col) for col in parts.T])


def integrate_radial(g: Callable, scheme: QuadratureScheme) -> float:
    """|S^(d-1)| * int_0^inf g(r) r^(d-1) dr for a profile g given as a function of r."""
    r, wr = scheme.radial()
    vals = np.asarray(g(r), dtype=float)
    _check_finite(vals, r[:, None])
    return sphere_area(scheme.d - 1) * math.fsum(wr * vals)


def modulus(f) -> Callable:
    """Pointwise |f| for spinor fields, vector fields and scalar callables."""
    if isinstance(f, SpinorField):
        return lambda x: np.linalg.norm(f(x), axis=-1)
    if isinstance(f, VectorField):
        return lambda x: np.linalg.norm(f.value(x), axis=-1)
    return lambda x: np.abs(f(x))


def lp_norm(f, p: float, scheme: QuadratureScheme, radial: bool = False, center=None) -> float:
    """(int |f|^p)^(1/p)."""
    if p < 1:
        raise ValueError("p must be >= 1")
    mod = modulus(f)
    return integrate(lambda x: mod(x) ** p, scheme, radial=radial, center=center) ** (1.0 / p)


def sobolev_constant(d: int) -> float:
    """S_d = d (d - 2) / 4 * |S^d|^(2/d)."""
    if d < 3:
        raise ValueError("the Sobolev constant is defined for d >= 3")
    return d * (d - 2) / 4.0 * sphere_area(d) ** (2.0 / d)


def penrose_components(f: SpinorField, x) -> np.ndarray:
    """All [-i d_j - (1/d) gamma_j gamma.(-i nabla)] f, shape (n, d, N)."""
    if not isinstance(f, SpinorField):
        raise TypeError(f"unsupported field type {type(f).__name__}")
    pts, single = _as_points(x, f.d)
    _, grad = f.jet(pts)
    dirac = dirac_from_grad(f.G, grad)
    pen = -1j * grad - np.einsum("jab,nb->nja", f.G.gammas, dirac) / f.d
    return _out(pen, single)


def penrose_component(f: SpinorField, G: GammaSet, j: int, x) -> np.ndarray:
    """The j-th Penrose component (0-based j)."""
    if f.G.d != G.d:
        raise ValueError("field and gamma set dimensions differ")
    pen = penrose_components(f, x)
    return pen[..., j, :]


@dataclass(frozen=True, eq=False)
class RegularizedModulus:
    """|psi|_eps = sqrt(|psi|^2 + eps^2)."""

    field: SpinorField
    eps: float

    def __post_init__(self):
        if not self.eps > 0:
            raise ValueError("eps must be positive")

    def __call__(self, x) -> np.ndarray:
        v = self.field(x)
        return np.sqrt(np.sum(np.abs(v) ** 2, axis=-1) + self.eps**2)

    def power(self, x, exponent: float) -> np.ndarray:
        return self(x) ** exponent

    def power_gradient(self, x, exponent: float) -> np.ndarray:
        """grad |psi|_eps^q = q |psi|_eps^(q-2) Re<psi, grad psi>."""
        pts, single = _as_points(x, self.field.d)
        v, g = self.field.jet(pts)
        re = np.einsum("na,nka->nk", v.conj(), g).real
        me = np.sqrt(np.sum(np.abs(v) ** 2, axis=-1) + self.eps**2)
        return _out((exponent * me ** (exponent - 2.0))[:, None] * re, single)


def regularized_power_gradient(f: SpinorField, eps: float, exponent: float, x) -> np.ndarray:
    return RegularizedModulus(f, eps).power_gradient(x, exponent)


@dataclass(frozen=True, eq=False)
class QuotientField(SpinorField):
    """psi / |psi|_eps^q; ``eps = 0`` gives psi / |psi|^q (psi must not vanish)."""

    base: SpinorField
    q: float
    eps: float = 0.0

    @property
    def G(self) -> GammaSet:
        return self.base.G

    def jet(self, x):
        pts, single = _as_points(x, self.d)
        v, g = self.base.jet(pts)
        me2 = np.sum(np.abs(v) ** 2, axis=-1) + self.eps**2
        me = np.sqrt(me2)
        re = np.einsum("na,nka->nk", v.conj(), g).real
        value = me[:, None] ** (-self.q) * v
        grad = me[:, None, None] ** (-self.q) * g - (self.q * me ** (-self.q - 2.0))[
            :, None, None
        ] * (re[:, :, None] * v[:, None, :])
        return _out(value, single), _out(grad, single)


def fd_gradient(f: Callable, x, h: Optional[float] = None) -> np.ndarray:
    """Centered second-order differences, one per coordinate: shape (d, *f(x).shape)."""
    x = np.asarray(x, dtype=float)
    if h is None:
        h = 1e-3 * (1.0 + np.linalg.norm(x))
    if not h > 0:
        raise ValueError("step must be positive")
    out = []
    for k in range(x.shape[0]):
        e = np.zeros_like(x)
        e[k] = h
        out.append((np.asarray(f(x + e)) - np.asarray(f(x - e))) / (2.0 * h))
    return np.array(out)


def observed_order(errors, steps) -> float:
    """Least-squares slope of log(error) against log(step)."""
    return float(np.polyfit(np.log(steps), np.log(errors), 1)[0])


def identity_densities(f: SpinorField, x, eps: float, use_numba=None) -> np.ndarray:
    """Pointwise integrand columns for the regularized integral identity (see _kernels)."""
    pts, _ = _as_points(x, f.d)
    v, g = f.jet(pts)
    return _kernels.identity_densities(v, g, f.G.gammas, eps, use_numba=use_numba)
