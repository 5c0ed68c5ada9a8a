import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from gammareg.core import Box, Polytope2D, build_grid, sample
from gammareg.funclang import Function

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


def make(expr, lower, upper, res):
    """Sample an expression on a box grid."""
    grid = build_grid(Box(np.atleast_1d(lower), np.atleast_1d(upper)), res)
    return sample(grid, Function(expr))


def make_poly(expr, vertices, res):
    grid = build_grid(Polytope2D(np.asarray(vertices, dtype=float)), res)
    return sample(grid, Function(expr))


@pytest.fixture(scope="session")
def double_well():
    return make("(x^2-1)^2", -2, 2, 400)


@pytest.fixture(scope="session")
def three_well():
    return make("x^2*(x^2-1)^2", -2, 2, 100)


@pytest.fixture(scope="session")
def spike():
    return make("if x == 0 then 1 else x^2", -1, 1, 100)
