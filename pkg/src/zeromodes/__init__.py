"""Extremal Dirac zero modes: construction and numerical certificates."""
from .clifford import (
    DegenerateLift,
    GammaSet,
    NotLiftable,
    SpinLift,
    VacuumSpinor,
    build_gammas,
    spin_lift,
    vacuum_spinor,
)
from .calculus import QuadratureScheme, integrate, lp_norm, sobolev_constant, sphere_area
from .fields import (
    ClosedFormSpinorField,
    ClosedFormVectorField,
    ZeroModePair,
    conformal_invert,
    equality_data,
    extremal_pair,
    gauge_transform,
    scalar_pair,
    transform_pair,
    twistor,
)
from .verify import VerificationReport, classify_equality

__all__ = [
    "DegenerateLift", "GammaSet", "NotLiftable", "SpinLift", "VacuumSpinor",
    "build_gammas", "spin_lift", "vacuum_spinor",
    "QuadratureScheme", "integrate", "lp_norm", "sobolev_constant", "sphere_area",
    "ClosedFormSpinorField", "ClosedFormVectorField", "ZeroModePair",
    "conformal_invert", "equality_data", "extremal_pair", "gauge_transform",
    "scalar_pair", "transform_pair", "twistor",
    "VerificationReport", "classify_equality",
]
__version__ = "0.1.0"
