import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from edgepump import ModelParams, sample_disorder

# derandomized so CI failures reproduce locally; numerical tests have no
# meaningful deadline
settings.register_profile(
    "unit", derandomize=True, deadline=None, max_examples=25,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("unit")


@pytest.fixture(scope="session")
def clean42():
    return ModelParams(L=42)


@pytest.fixture(scope="session")
def clean105():
    return ModelParams(L=105)


@pytest.fixture(scope="session")
def rng():
    return np.random.Generator(np.random.PCG64(20240816))


@pytest.fixture()
def small_disordered():
    p = ModelParams(L=8, W=0.3)
    return p, sample_disorder(p, 11)
