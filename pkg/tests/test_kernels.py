import os
import subprocess
import sys

import numpy as np
import pytest

from zeromodes import _kernels
from zeromodes.clifford import build_gammas
from zeromodes.fields import random_unit_spinor

needs_numba = pytest.mark.skipif(not _kernels.HAVE_NUMBA, reason="numba not installed")


def _inputs(d, n=64, seed=0):
    rng = np.random.default_rng(seed)
    G = build_gammas(d)
    args = (rng.standard_normal((n, d)) * 2, rng.standard_normal(d), 1.3, 0.7, d / 2.0,
            random_unit_spinor(G.N, rng), random_unit_spinor(G.N, rng), np.asarray(G.gammas))
    return args


@needs_numba
@pytest.mark.parametrize("d", [3, 4, 5, 7])
def test_jet_kernels_agree(d):
    args = _inputs(d)
    v1, g1 = _kernels.envelope_affine_jet(*args, use_numba=True)
    v2, g2 = _kernels.envelope_affine_jet(*args, use_numba=False)
    assert np.abs(v1 - v2).max() < 1e-14
    assert np.abs(g1 - g2).max() < 1e-14


@needs_numba
@pytest.mark.parametrize("d", [3, 5])
@pytest.mark.parametrize("eps", [1e-4, 0.1, 10.0])
def test_density_kernels_agree(d, eps):
    args = _inputs(d, seed=1)
    v, g = _kernels.envelope_affine_jet(*args, use_numba=False)
    a = _kernels.identity_densities(v, g, args[-1], eps, use_numba=True)
    b = _kernels.identity_densities(v, g, args[-1], eps, use_numba=False)
    assert np.allclose(a, b, rtol=1e-12, atol=1e-300)


def test_environment_flag_selects_numpy():
    code = "from zeromodes import _kernels; print(_kernels.USE_NUMBA)"
    env = dict(os.environ, ZEROMODES_NUMBA="0")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "False"
