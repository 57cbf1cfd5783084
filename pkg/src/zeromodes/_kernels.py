"""Pointwise hot loops over quadrature nodes.

Each kernel has a numba version and a numpy version with identical
signatures.  Numba is used when importable unless ``ZEROMODES_NUMBA=0``.
"""
from __future__ import annotations

import os

import numpy as np

try:
    import numba

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and os.environ.get("ZEROMODES_NUMBA", "1") not in ("0", "false", "no")


# ---------------------------------------------------------------- numpy path


def envelope_affine_jet_np(pts, center, scale, amp, power, phi_lo, phi_hi, gammas):
    y = (pts - center) / scale
    env = 1.0 / (1.0 + np.einsum("nk,nk->n", y, y))
    affine = phi_lo + np.einsum("kab,nk,b->na", gammas, y, phi_hi)
    pref = amp * env**power
    value = pref[:, None] * affine
    hi_k = np.einsum("kab,b->ka", gammas, phi_hi)
    grad = pref[:, None, None] * (
        (-2.0 * power / scale) * (env[:, None, None] * y[:, :, None]) * affine[:, None, :]
        + hi_k[None] / scale
    )
    return value, grad


def identity_densities_np(psi, grad, gammas, eps):
    """Columns: Penrose density of psi/|psi|_eps^(d/(d-1)) times |psi|_eps^2,
    |gamma.grad psi|^2 / |psi|_eps^(2/(d-1)), |grad |psi|_eps^((d-2)/(d-1))|^2, |psi|^2."""
    d = gammas.shape[0]
    q = d / (d - 1.0)
    qq = (d - 2.0) / (d - 1.0)
    mod2 = np.einsum("na,na->n", psi.conj(), psi).real
    me2 = mod2 + eps * eps
    me = np.sqrt(me2)
    re = np.einsum("na,nka->nk", psi.conj(), grad).real  # Re<psi, d_k psi>
    # d_k phi = |psi|_e^-q d_k psi - q |psi|_e^(-q-2) Re<psi, d_k psi> psi
    dphi = me[:, None, None] ** (-q) * grad - (q * me ** (-q - 2.0))[:, None, None] * (
        re[:, :, None] * psi[:, None, :]
    )
    dir_phi = -1j * np.einsum("kab,nkb->na", gammas, dphi)
    pen = -1j * dphi - (1.0 / d) * np.einsum("jab,nb->nja", gammas, dir_phi)
    pen2 = np.einsum("nja,nja->n", pen.conj(), pen).real * me2
    gdpsi = np.einsum("kab,nkb->na", gammas, grad)
    dirac2 = np.einsum("na,na->n", gdpsi.conj(), gdpsi).real / me ** (2.0 / (d - 1.0))
    # grad |psi|_e^qq = qq |psi|_e^(qq-2) Re<psi, grad psi>
    gp2 = (qq * me ** (qq - 2.0)) ** 2 * np.einsum("nk,nk->n", re, re)
    return np.stack([pen2, dirac2, gp2, mod2], axis=1)


# ---------------------------------------------------------------- numba path

if HAVE_NUMBA:

    @numba.njit(cache=True)
    def envelope_affine_jet_nb(pts, center, scale, amp, power, phi_lo, phi_hi, gammas):
        n, d = pts.shape
        N = phi_lo.shape[0]
        value = np.empty((n, N), dtype=np.complex128)
        grad = np.empty((n, d, N), dtype=np.complex128)
        hi_k = np.zeros((d, N), dtype=np.complex128)
        for k in range(d):
            for a in range(N):
                acc = 0j
                for b in range(N):
                    acc += gammas[k, a, b] * phi_hi[b]
                hi_k[k, a] = acc
        y = np.empty(d)
        affine = np.empty(N, dtype=np.complex128)
        for i in range(n):
            r2 = 0.0
            for k in range(d):
                y[k] = (pts[i, k] - center[k]) / scale
                r2 += y[k] * y[k]
            env = 1.0 / (1.0 + r2)
            pref = amp * env**power
            for a in range(N):
                acc = phi_lo[a]
                for k in range(d):
                    acc += y[k] * hi_k[k, a]
                affine[a] = acc
                value[i, a] = pref * acc
            c1 = -2.0 * power / scale * env * pref
            for k in range(d):
                for a in range(N):
                    grad[i, k, a] = c1 * y[k] * affine[a] + pref * hi_k[k, a] / scale
        return value, grad

    @numba.njit(cache=True)
    def identity_densities_nb(psi, grad, gammas, eps):
        n, d, N = grad.shape
        q = d / (d - 1.0)
        qq = (d - 2.0) / (d - 1.0)
        out = np.empty((n, 4))
        dphi = np.empty((d, N), dtype=np.complex128)
        dir_phi = np.empty(N, dtype=np.complex128)
        gd = np.empty(N, dtype=np.complex128)
        re = np.empty(d)
        for i in range(n):
            mod2 = 0.0
            for a in range(N):
                mod2 += psi[i, a].real ** 2 + psi[i, a].imag ** 2
            me2 = mod2 + eps * eps
            me = np.sqrt(me2)
            for k in range(d):
                acc = 0.0
                for a in range(N):
                    acc += (psi[i, a].conjugate() * grad[i, k, a]).real
                re[k] = acc
            s0 = me ** (-q)
            s1 = q * me ** (-q - 2.0)
            for k in range(d):
                for a in range(N):
                    dphi[k, a] = s0 * grad[i, k, a] - s1 * re[k] * psi[i, a]
            for a in range(N):
                acc = 0j
                acc2 = 0j
                for k in range(d):
                    for b in range(N):
                        acc += gammas[k, a, b] * dphi[k, b]
                        acc2 += gammas[k, a, b] * grad[i, k, b]
                dir_phi[a] = -1j * acc
                gd[a] = acc2
            pen2 = 0.0
            for j in range(d):
                for a in range(N):
                    acc = 0j
                    for b in range(N):
                        acc += gammas[j, a, b] * dir_phi[b]
                    p = -1j * dphi[j, a] - acc / d
                    pen2 += p.real * p.real + p.imag * p.imag
            dirac2 = 0.0
            for a in range(N):
                dirac2 += gd[a].real ** 2 + gd[a].imag ** 2
            rr = 0.0
            for k in range(d):
                rr += re[k] * re[k]
            out[i, 0] = pen2 * me2
            out[i, 1] = dirac2 / me ** (2.0 / (d - 1.0))
            out[i, 2] = (qq * me ** (qq - 2.0)) ** 2 * rr
            out[i, 3] = mod2
        return out


def _contig(*arrays):
    return tuple(np.ascontiguousarray(a) for a in arrays)


def envelope_affine_jet(pts, center, scale, amp, power, phi_lo, phi_hi, gammas, use_numba=None):
    use = USE_NUMBA if use_numba is None else (use_numba and HAVE_NUMBA)
    if use:
        pts, center, phi_lo, phi_hi, gammas = _contig(
            np.asarray(pts, float), np.asarray(center, float),
            np.asarray(phi_lo, complex), np.asarray(phi_hi, complex), np.asarray(gammas, complex),
        )
        return envelope_affine_jet_nb(pts, center, float(scale), float(amp), float(power), phi_lo, phi_hi, gammas)
    return envelope_affine_jet_np(pts, center, scale, amp, power, phi_lo, phi_hi, gammas)


def identity_densities(psi, grad, gammas, eps, use_numba=None):
    use = USE_NUMBA if use_numba is None else (use_numba and HAVE_NUMBA)
    if use:
        psi, grad, gammas = _contig(
            np.asarray(psi, complex), np.asarray(grad, complex), np.asarray(gammas, complex)
        )
        return identity_densities_nb(psi, grad, gammas, float(eps))
    return identity_densities_np(psi, grad, gammas, eps)
