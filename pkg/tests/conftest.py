import math

import pytest
from hypothesis import HealthCheck, settings

from torusgreen import lattice

settings.register_profile(
    "ci",
    max_examples=25,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("ci")

HEX_TAU = complex(0.5, math.sqrt(3) / 2)


@pytest.fixture(scope="session")
def square_torus():
    return lattice.make_torus(1j)


@pytest.fixture(scope="session")
def hex_torus():
    return lattice.make_torus(HEX_TAU)


@pytest.fixture(scope="session")
def rhombic_torus():
    return lattice.make_torus(0.5 + 0.8j)


@pytest.fixture(scope="session")
def generic_torus():
    return lattice.make_torus(0.13 + 0.92j)
