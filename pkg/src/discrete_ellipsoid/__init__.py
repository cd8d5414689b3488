"""Discrete confocal quadrics: closed discrete ellipsoids as principal binets,
their discrete circular cross sections, and a verifier for their invariants."""

from .binet import (
    ClosedEllipsoidPair,
    ConfocalLattice3D,
    DiscreteCircle,
    SemiBinet,
    build_closed_ellipsoid,
    build_discrete_confocal_3d,
    build_semi_ellipsoid,
    build_single_ellipsoid,
    extract_discrete_circles,
    glue_closed,
)
from .halfint import HalfIndex, build_identification, make_domain
from .shape import ShapeParams, approximate_q, closure_q, g_recurrence, solve_boundary_shape
from .verify import CheckEntry, VerificationReport

__version__ = "0.1.0"

__all__ = [
    "CheckEntry",
    "ClosedEllipsoidPair",
    "ConfocalLattice3D",
    "DiscreteCircle",
    "HalfIndex",
    "SemiBinet",
    "ShapeParams",
    "VerificationReport",
    "approximate_q",
    "build_closed_ellipsoid",
    "build_discrete_confocal_3d",
    "build_identification",
    "build_semi_ellipsoid",
    "build_single_ellipsoid",
    "closure_q",
    "extract_discrete_circles",
    "g_recurrence",
    "glue_closed",
    "make_domain",
    "solve_boundary_shape",
]
