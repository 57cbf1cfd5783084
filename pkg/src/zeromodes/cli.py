"""Command-line driver: ``zeromodes verify | lift | classify | emit-profile``."""
from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Optional

import numpy as np
import scipy.special

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import verify as V
from .calculus import QuadratureScheme, QuotientField, sobolev_constant
from .clifford import NotLiftable, build_gammas, random_rotation, rotation, spin_lift, vacuum_spinor
from .fields import (
    ClosedFormSpinorField,
    ClosedFormVectorField,
    ScalarPhase,
    ZeroModePair,
    conformal_invert,
    equality_data,
    extremal_pair,
    gauge_transform,
    random_admissible,
    random_unit_spinor,
    sample_points,
    transform_pair,
    twistor,
)

EXIT_OK, EXIT_FAIL, EXIT_CONFIG, EXIT_INTERNAL = 0, 1, 2, 3

SUITES = (
    "constants", "zero-mode", "identity", "equality-chain",
    "twistor", "classify", "scalar", "conformal",
)
SUITE_ALIASES = {"gauge": "conformal", "conformal/gauge": "conformal"}
IDENTITY_SWEEP = (1e-1, 1e-2, 1e-3, 1e-4)


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    dims: tuple = (3,)
    eps: tuple = IDENTITY_SWEEP
    limit_eps: tuple = V.LIMIT_SWEEP
    radial_order: int = 160
    angular_order: Optional[int] = None
    points: int = 200
    seed: int = 0
    out: Optional[str] = None
    suites: tuple = SUITES

    def validate(self) -> "RunConfig":
        if not self.dims or any(int(d) != d or d < 3 for d in self.dims):
            raise ConfigError(f"dims: every dimension must be an integer >= 3, got {list(self.dims)}")
        for name in ("eps", "limit_eps"):
            sweep = getattr(self, name)
            if not sweep or any(not e > 0 for e in sweep):
                raise ConfigError(f"{name}: values must be positive, got {list(sweep)}")
            if any(b >= a for a, b in zip(sweep, sweep[1:])):
                raise ConfigError(f"{name}: values must be strictly decreasing, got {list(sweep)}")
        if len(self.limit_eps) < 2:
            raise ConfigError("limit_eps: extrapolation needs at least two values")
        if self.radial_order < 2:
            raise ConfigError("radial_order: must be >= 2")
        if self.angular_order is not None and self.angular_order < 1:
            raise ConfigError("angular_order: must be >= 1")
        if self.points < 1:
            raise ConfigError("points: must be >= 1")
        bad = [s for s in self.suites if s not in SUITES]
        if bad:
            raise ConfigError(f"suites: unknown suite(s) {bad}; choose from {list(SUITES)}")
        return self


_CONFIG_TYPES = {
    "dims": (list, int), "eps": (list, float), "limit_eps": (list, float),
    "radial_order": (None, int), "angular_order": (None, int), "points": (None, int),
    "seed": (None, int), "out": (None, str), "suites": (list, str),
}


def load_config(path: str) -> dict:
    """Flat TOML table of RunConfig fields."""
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    out = {}
    for key, val in raw.items():
        if key not in _CONFIG_TYPES:
            raise ConfigError(f"{path}: unknown field {key!r}")
        container, kind = _CONFIG_TYPES[key]
        try:
            if container is list:
                val = tuple(kind(v) for v in (val if isinstance(val, list) else [val]))
                if key == "suites":
                    val = tuple(SUITE_ALIASES.get(v, v) for v in val)
            elif not isinstance(val, (int, float, str)) or isinstance(val, bool):
                raise TypeError
            else:
                val = kind(val)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{path}: field {key!r} has invalid value {val!r}") from exc
        out[key] = val
    return out


def build_config(args) -> RunConfig:
    cfg = RunConfig()
    if args.config:
        cfg = replace(cfg, **load_config(args.config))
    overrides = {}
    if args.dim:
        overrides["dims"] = tuple(args.dim)
    if args.eps:
        overrides["eps"] = tuple(args.eps)
    if args.limit_eps:
        overrides["limit_eps"] = tuple(args.limit_eps)
    if args.suite:
        overrides["suites"] = tuple(SUITE_ALIASES.get(s, s) for s in args.suite)
    for name in ("radial_order", "angular_order", "points", "seed", "out"):
        val = getattr(args, name)
        if val is not None:
            overrides[name] = val
    return replace(cfg, **overrides).validate()


# ---------------------------------------------------------------- suites


def _rng(cfg: RunConfig, suite: str, d: int) -> np.random.Generator:
    # independent stream per (suite, d) so suite selection never changes results
    return np.random.default_rng([cfg.seed, SUITES.index(suite), d])


def _scheme(cfg: RunConfig, d: int, radial_order=None) -> QuadratureScheme:
    return QuadratureScheme(d, radial_order or cfg.radial_order, cfg.angular_order)


def _skip(suite, d, why) -> V.VerificationReport:
    return V.VerificationReport(f"{suite}[d={d}]", [], "property", 0.0, True, {"skipped": why})


def _identity_fields(G, rng):
    d = G.d
    out = []
    if d % 2:
        out.append(("extremal", extremal_pair(G, vacuum_spinor(G)).psi))
    out.append(("twistor_envelope", ClosedFormSpinorField(
        G, d / 2.0 + 1.0, random_unit_spinor(G.N, rng), random_unit_spinor(G.N, rng))))
    out.append(("shifted", ClosedFormSpinorField(
        G, (d + 1) / 2.0, random_unit_spinor(G.N, rng), 0.5 * random_unit_spinor(G.N, rng),
        center=0.3 * rng.standard_normal(d), scale=1.5, amplitude=2.0)))
    return out


def suite_constants(cfg, d, rng):
    # |S^d| through log-gamma as an independent evaluation of the same formula
    area = 2.0 * np.exp((d + 1) / 2.0 * np.log(np.pi) - scipy.special.gammaln((d + 1) / 2.0))
    reps = [V.VerificationReport.quantitative(
        f"sobolev_constant[d={d}]", sobolev_constant(d), d * (d - 2) / 4.0 * area ** (2.0 / d), 1e-14,
        formula="d(d-2)/4 |S^d|^(2/d)")]
    tol = 1e-9 if d <= 5 else 1e-6
    reps.append(V.calibration(_scheme(cfg, d), True, tol))
    reps.append(V.calibration(_scheme(cfg, d), False, tol))
    if d % 2:
        G = build_gammas(d)
        reps.append(V.sharp_constant_ratio(extremal_pair(G, vacuum_spinor(G)).A, _scheme(cfg, d)))
    return reps


def suite_zero_mode(cfg, d, rng):
    if d % 2 == 0:
        return [_skip("zero_mode", d, "extremal zero modes exist for odd d only")]
    G = build_gammas(d)
    P = extremal_pair(G, vacuum_spinor(G))
    pts = sample_points(d, cfg.points, rng)
    Q = transform_pair(P, rng.standard_normal(d), 1.5, 2.0, spin_lift(G, random_rotation(d, rng)))
    r1 = V.check_zero_mode(P, pts)
    r2 = V.check_zero_mode(Q, pts)
    r2.claim = f"zero_mode_transformed[d={d}]"
    return [r1, r2, V.check_divergence_condition(P.A, pts)]


def suite_identity(cfg, d, rng):
    G = build_gammas(d)
    reps = []
    for name, psi in _identity_fields(G, rng):
        for r in V.check_identity_prop(psi, G, list(cfg.eps), _scheme(cfg, d)):
            r.claim = r.claim.replace("identity[", f"identity_{name}[")
            reps.append(r)
    return reps


def suite_equality_chain(cfg, d, rng):
    if d % 2 == 0:
        return [_skip("equality_chain", d, "extremal zero modes exist for odd d only")]
    G = build_gammas(d)
    P = extremal_pair(G, vacuum_spinor(G))
    sch = _scheme(cfg, d, V.LIMIT_RADIAL_ORDER)
    scaled = ZeroModePair(P.psi, ClosedFormVectorField(P.A.w, P.A.M, 1.1 * P.A.kappa))
    r_scaled = V.equality_chain_limits(scaled, G, cfg.limit_eps, sch, tol=np.inf, s_tol=1e-4)
    r_scaled.claim = f"equality_chain_scaled_A[d={d}]"
    return [
        V.equality_chain_limits(P, G, cfg.limit_eps, sch),
        r_scaled,
        V.inequality_chain(P, sch, cfg.limit_eps),
    ]


def suite_twistor(cfg, d, rng):
    G = build_gammas(d)
    pts = sample_points(d, cfg.points, rng)
    r = V.check_twistor(twistor(G, random_unit_spinor(G.N, rng), random_unit_spinor(G.N, rng)),
                        G, pts, tol=1e-13)
    r.claim = f"twistor_affine[d={d}]"
    reps = [r]
    if d % 2:
        psi = extremal_pair(G, vacuum_spinor(G)).psi
        r = V.check_twistor(QuotientField(psi, d / (d - 1.0)), G, pts, tol=1e-11)
        r.claim = f"twistor_extremal_quotient[d={d}]"
        reps.append(r)
    return reps


def suite_classify(cfg, d, rng):
    G = build_gammas(d)
    if d % 2 == 0:
        draws = 50
        hits = sum(equality_data(G, *random_admissible(G, rng)).parity_obstruction for _ in range(draws))
        return [V.VerificationReport.quantitative(
            f"parity_obstruction[d={d}]", hits / draws, 1.0, 0.0, draws=draws)]
    P = extremal_pair(G, vacuum_spinor(G))
    Q = transform_pair(P, rng.standard_normal(d), float(rng.uniform(0.5, 2.0)),
                       float(rng.uniform(0.5, 3.0)), spin_lift(G, random_rotation(d, rng)))
    return [V.classification_report(Q, G, seed=cfg.seed)]


def suite_scalar(cfg, d, rng):
    G = build_gammas(d)
    phi0 = random_unit_spinor(G.N, rng)
    pts = sample_points(d, cfg.points, rng)
    return [V.check_scalar_equality(G, phi0, s, _scheme(cfg, d), pts) for s in (1, -1)]


def suite_conformal(cfg, d, rng):
    if d % 2 == 0:
        return [_skip("conformal", d, "extremal zero modes exist for odd d only")]
    G = build_gammas(d)
    P = extremal_pair(G, vacuum_spinor(G))
    pts = sample_points(d, cfg.points, rng)
    phase = ScalarPhase(float(rng.standard_normal()), rng.standard_normal(d), m=1.0)
    sch = _scheme(cfg, d)
    return [
        V.check_symmetry(P, gauge_transform(P, phase), sch, pts, "gauge", undo_gauge=True),
        V.check_symmetry(P, conformal_invert(P, G), sch, pts, "inversion"),
    ]


SUITE_FUNCS = {
    "constants": suite_constants, "zero-mode": suite_zero_mode, "identity": suite_identity,
    "equality-chain": suite_equality_chain, "twistor": suite_twistor,
    "classify": suite_classify, "scalar": suite_scalar, "conformal": suite_conformal,
}


def _strip_timing(obj):
    if isinstance(obj, dict):
        return {k: _strip_timing(v) for k, v in obj.items() if k != "wall_time"}
    if isinstance(obj, list):
        return [_strip_timing(v) for v in obj]
    return obj


def run(cfg: RunConfig, stream=sys.stdout) -> tuple[int, list]:
    reports = []
    for suite in cfg.suites:
        for d in cfg.dims:
            reports.extend(SUITE_FUNCS[suite](cfg, d, _rng(cfg, suite, d)))
    doc = _strip_timing(V.reports_to_json(reports))
    text = json.dumps(doc, indent=1, sort_keys=True, allow_nan=True) + "\n"
    if cfg.out:
        Path(cfg.out).write_text(text)
    for r in doc:
        print(f"{'PASS' if r['pass'] else 'FAIL'}  {r['claim']}", file=stream)
    return (EXIT_OK if all(r["pass"] for r in doc) else EXIT_FAIL), doc


# ---------------------------------------------------------------- other commands


def cmd_lift(args) -> int:
    d = args.dim
    G = build_gammas(d)
    if args.matrix:
        O = np.array(json.loads(args.matrix), dtype=float)
    else:
        i, j = args.plane
        if not (1 <= i <= d and 1 <= j <= d and i != j):
            raise ConfigError(f"--plane needs two distinct indices in 1..{d}")
        O = rotation(d, i, j, args.angle)
    try:
        L = spin_lift(G, O)
    except NotLiftable as exc:
        print(f"not liftable: {exc}")
        return EXIT_FAIL
    np.set_printoptions(precision=12, suppress=True, linewidth=120)
    print("U =")
    print(L.U)
    print(f"residual = {L.residual(G):.3e}")
    return EXIT_OK


def load_pair(path: str):
    try:
        obj = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: line {exc.lineno}: {exc.msg}") from exc
    try:
        d = int(obj["d"])
        G = build_gammas(d)
        psi = ClosedFormSpinorField.from_json(obj["psi"], G)
        A = ClosedFormVectorField.from_json(obj["A"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: bad field descriptor ({exc})") from exc
    return G, ZeroModePair(psi, A)


def cmd_classify(args) -> int:
    G, pair = load_pair(args.descriptor)
    try:
        cl = V.classify_equality(pair, G)
    except (V.ObstructionError, V.PreconditionError) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}))
        return EXIT_FAIL
    print(json.dumps(cl.to_json(), indent=1, sort_keys=True))
    return EXIT_OK


PROFILE_FIELDS = ("psi", "A", "hopf")


def emit_profile(field_id: str, d: int, direction, t_max: float, samples: int, grid: int):
    """(header, rows) for a profile along a ray or, for ``hopf``, on a cube grid."""
    if field_id not in PROFILE_FIELDS:
        raise ConfigError(f"unknown field id {field_id!r}; choose from {list(PROFILE_FIELDS)}")
    if field_id == "hopf" and d != 3:
        raise ConfigError("hopf tangent data is defined for d = 3")
    if d % 2 == 0:
        raise ConfigError("profiles of the extremal pair need odd d")
    G = build_gammas(d)
    P = extremal_pair(G, vacuum_spinor(G))
    xs = [f"x{k + 1}" for k in range(d)]
    if field_id == "hopf":
        g = np.linspace(-t_max, t_max, grid)
        pts = np.stack(np.meshgrid(g, g, g, indexing="ij"), axis=-1).reshape(-1, 3)
        A = P.A.value(pts)
        tangent = A / np.linalg.norm(A, axis=1, keepdims=True)
        header = xs + ["t1", "t2", "t3", "modulus"]
        return header, np.column_stack([pts, tangent, np.linalg.norm(A, axis=1)])
    e = np.asarray(direction, dtype=float)
    if e.shape != (d,) or not np.linalg.norm(e) > 0:
        raise ConfigError(f"direction must be a nonzero vector of length {d}")
    e = e / np.linalg.norm(e)
    t = np.linspace(0.0, t_max, samples)
    pts = t[:, None] * e
    if field_id == "psi":
        v = P.psi(pts)
        return ["t"] + xs + ["modulus"], np.column_stack([t, pts, np.linalg.norm(v, axis=1)])
    A = P.A.value(pts)
    header = ["t"] + xs + [f"A{k + 1}" for k in range(d)] + ["modulus"]
    return header, np.column_stack([t, pts, A, np.linalg.norm(A, axis=1)])


def cmd_emit_profile(args) -> int:
    direction = args.direction
    if direction is None:
        direction = [1.0] + [0.0] * (args.dim - 1)
    header, rows = emit_profile(args.field, args.dim, direction, args.t_max, args.samples, args.grid)
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(x)) for x in row])
    finally:
        if args.out:
            fh.close()
    return EXIT_OK


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="zeromodes", description=__doc__)
    sub = p.add_subparsers(dest="command", required=True)

    v = sub.add_parser("verify", help="run verification suites and write a JSON report")
    v.add_argument("--suite", action="append", choices=SUITES + tuple(SUITE_ALIASES),
                   help="suite to run (repeatable; default all)")
    v.add_argument("-d", "--dim", type=int, action="append", help="dimension (repeatable)")
    v.add_argument("--eps", type=float, nargs="+", help="eps values for the identity suite")
    v.add_argument("--limit-eps", type=float, nargs="+", help="eps sweep for the chain limits")
    v.add_argument("--radial-order", type=int)
    v.add_argument("--angular-order", type=int)
    v.add_argument("--points", type=int, help="random test points per pointwise check")
    v.add_argument("--seed", type=int)
    v.add_argument("--out", help="path of the JSON report")
    v.add_argument("--config", help="TOML file with RunConfig fields; flags win")

    lf = sub.add_parser("lift", help="spin lift of a rotation")
    lf.add_argument("--dim", type=int, required=True)
    lf.add_argument("--plane", type=int, nargs=2, default=(1, 2), metavar=("I", "J"))
    lf.add_argument("--angle", type=float, default=0.0)
    lf.add_argument("--matrix", help="orthogonal matrix as a JSON nested list (overrides --plane)")

    c = sub.add_parser("classify", help="classify an equality pair from a JSON descriptor")
    c.add_argument("descriptor")

    e = sub.add_parser("emit-profile", help="CSV samples of the extremal fields")
    e.add_argument("field", help="psi, A or hopf")
    e.add_argument("--dim", type=int, default=3)
    e.add_argument("--direction", type=float, nargs="+")
    e.add_argument("--t-max", type=float, default=5.0)
    e.add_argument("--samples", type=int, default=101)
    e.add_argument("--grid", type=int, default=9, help="points per axis for hopf")
    e.add_argument("--out")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        if args.command == "verify":
            cfg = build_config(args)
            return run(cfg)[0]
        if args.command == "lift":
            if args.dim < 3:
                raise ConfigError("--dim must be >= 3")
            return cmd_lift(args)
        if args.command == "classify":
            return cmd_classify(args)
        return cmd_emit_profile(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - exit-code contract
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
