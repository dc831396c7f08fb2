import os

import pytest
from hypothesis import HealthCheck, settings

from cocyclelab.torus import LatticeAutomorphism

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile("ci", deadline=None, max_examples=200, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

CAT = ((5, 2), (2, 1))


@pytest.fixture(scope="session")
def cat():
    return LatticeAutomorphism(CAT)


@pytest.fixture(scope="session")
def cat2():
    return LatticeAutomorphism(CAT, (2, 1))
