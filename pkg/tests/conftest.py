import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from manifold.registry import get_manifold  # noqa: E402
from metricgraph.sampling import sample_manifold  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def square():
    return get_manifold("unit_square")


@pytest.fixture(scope="session")
def sphere():
    return get_manifold("unit_sphere")


@pytest.fixture(scope="session")
def torus():
    return get_manifold("flat_torus")


@pytest.fixture(scope="session")
def square_cloud(square):
    return sample_manifold(square, 400, {"density": "uniform"}, seed=3)


@pytest.fixture(scope="session")
def torus_cloud(torus):
    return sample_manifold(torus, 300, {"density": "uniform"}, seed=5)


@pytest.fixture(scope="session")
def corner_square(square):
    corners = [[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]
    return sample_manifold(square, 4, {"density": "none",
                                       "atoms": [{"point": c, "mass": 0.25} for c in corners]}, seed=0, k=3)
