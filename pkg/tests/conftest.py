import os
import warnings

import pytest
from hypothesis import HealthCheck, settings

from scthresh.dynamics import RegimeWarning
from scthresh.models import make_ldpc_regular

settings.register_profile(
    "default", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile("thorough", max_examples=300, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

# threshold constant and minimizer of x / f(x) for the (3,6) ensemble
EPS0 = 0.4294398
X0 = 0.26057


@pytest.fixture(scope="session")
def ldpc36():
    return make_ldpc_regular(3, 6)


@pytest.fixture(scope="session")
def ldpc36_folded():
    return make_ldpc_regular(3, 6, folded=True)


@pytest.fixture(autouse=True)
def _quiet_regime_warnings():
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RegimeWarning)
        yield
