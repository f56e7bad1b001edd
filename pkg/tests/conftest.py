import os
import sys

import numpy as np
import pytest
from hypothesis import settings

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
if ROOT not in sys.path:
    sys.path.insert(0, ROOT)

GOLDEN_DIR = os.path.join(ROOT, "tests", "golden")


settings.register_profile("dev", deadline=None, max_examples=50)
settings.register_profile(
    "ci",
    deadline=None,
    max_examples=settings.default.max_examples * 5)

if "CI" in os.environ:
    # CI can be slow, so be patient
    # Also we can run more tests there
    settings.load_profile("ci")
else:
    settings.load_profile("dev")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def cx():
    from probe_engine import SpacetimeComplex
    return SpacetimeComplex()
