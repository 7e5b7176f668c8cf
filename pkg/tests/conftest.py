import os

import pytest
from hypothesis import HealthCheck, settings

from calculus.syntax import parse
from core import console
from semantics.transitions import clear_caches

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", max_examples=500, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def t():
    """Shorthand parser for readable test terms."""
    return parse


@pytest.fixture(autouse=True)
def quiet_console():
    console.set_verbose(False)
    yield
    console.set_verbose(False)


@pytest.fixture(scope="session", autouse=True)
def fresh_transition_caches():
    clear_caches()
    yield
    clear_caches()
