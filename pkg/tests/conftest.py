import math
import os
from functools import lru_cache

import pytest
from hypothesis import HealthCheck, settings

from discrete_ellipsoid.binet import build_closed_ellipsoid
from discrete_ellipsoid.shape import solve_boundary_shape

settings.register_profile(
    "default",
    deadline=None,
    max_examples=40,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.register_profile("ci", deadline=None, max_examples=200, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@lru_cache(maxsize=None)
def closed_pair(N1: int, N2: int, s3: float | str):
    """Cached closed pair; ``s3="sphere"`` selects the unit-sphere member."""
    if s3 == "sphere":
        s3 = solve_boundary_shape(N1, N2).s3_sphere
    return build_closed_ellipsoid(N1, N2, float(s3))


@pytest.fixture
def pair_32():
    return closed_pair(3, 2, 0.7)


@pytest.fixture
def pair_21():
    return closed_pair(2, 1, 0.7)


def s3_sphere(N1, N2):
    return solve_boundary_shape(N1, N2).s3_sphere


SMALL_SIZES = [(1, 1), (2, 1), (1, 2), (3, 2), (2, 3)]
HALF_PI = math.pi / 2
