import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from retinadx.labels import ClassLabel
from retinadx.synth import SynthParams, generate_fundus

settings.register_profile(
    "default", max_examples=60, deadline=None,
    suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture(scope="session")
def fundus_samples():
    """One synthetic image per class, seed 3."""
    return {c: generate_fundus(SynthParams(class_label=c, seed=3)) for c in ClassLabel}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
