"""Time the numba kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--points 200000] [--repeat 5] [-d 3 -d 5]

Prints one row per (kernel, d) with the best-of-repeat wall time of each
backend, the speedup, and the max abs difference between the outputs.
"""
import argparse
import time

import numpy as np

from zeromodes import _kernels as K
from zeromodes.clifford import build_gammas
from zeromodes.fields import random_unit_spinor


def best_time(fn, repeat):
    out = fn()  # warm-up; also triggers jit compilation
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def flat(out):
    return out if isinstance(out, tuple) else (out,)


def bench(d, n, repeat, rng):
    G = build_gammas(d)
    gam = np.asarray(G.gammas, complex)
    pts = rng.standard_normal((n, d))
    center = 0.3 * rng.standard_normal(d)
    lo, hi = random_unit_spinor(G.N, rng), random_unit_spinor(G.N, rng)
    jet_args = (pts, center, 1.2, 1.5, d / 2 + 1.0, lo, hi, gam)
    rows = []
    for name, call in (
        ("envelope_affine_jet", lambda nb: K.envelope_affine_jet(*jet_args, use_numba=nb)),
        ("identity_densities", lambda nb: K.identity_densities(psi, grad, gam, 1e-3, use_numba=nb)),
    ):
        if name == "identity_densities":
            psi, grad = K.envelope_affine_jet(*jet_args, use_numba=False)
        t_np, out_np = best_time(lambda: call(False), repeat)
        t_nb, out_nb = best_time(lambda: call(True), repeat)
        diff = max(float(np.abs(a - b).max()) for a, b in zip(flat(out_np), flat(out_nb)))
        rows.append((name, d, t_np, t_nb, diff))
    return rows


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--points", type=int, default=200_000)
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("-d", "--dim", type=int, action="append")
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)
    if not K.HAVE_NUMBA:
        raise SystemExit("numba is not importable; nothing to compare")
    rng = np.random.default_rng(args.seed)
    print(f"{'kernel':<22}{'d':>3}{'numpy [s]':>12}{'numba [s]':>12}{'speedup':>9}{'max diff':>11}")
    for d in args.dim or [3, 5, 7]:
        for name, dd, t_np, t_nb, diff in bench(d, args.points, args.repeat, rng):
            print(f"{name:<22}{dd:>3}{t_np:>12.4f}{t_nb:>12.4f}{t_np / t_nb:>9.2f}{diff:>11.1e}")


if __name__ == "__main__":
    main()
