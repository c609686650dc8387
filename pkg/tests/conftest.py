import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "default",
    max_examples=25,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

KET0 = np.array([1, 0], dtype=complex)
KET_PLUS = np.array([1, 1], dtype=complex) / np.sqrt(2)


@pytest.fixture
def zx_projectors():
    from psbounds.scenarios import mub_measurements

    return mub_measurements(2, 2).as_projectors()


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
