from __future__ import annotations

import os
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def walk_data():
    from kckf.models import preprocess
    from kckf.sim import Scenario, TrajectoryProfile

    truth, raw = Scenario(TrajectoryProfile("walk-like", duration=60.0), seed=7).build()
    return truth, preprocess(raw)
