import os
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from puttloop import corpus
from puttloop.dynamics import SimConfig

settings.register_profile("default", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", deadline=None, max_examples=200, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture(scope="session")
def bundled():
    return corpus.load_corpus()


@pytest.fixture(scope="session")
def cfg():
    return SimConfig()
