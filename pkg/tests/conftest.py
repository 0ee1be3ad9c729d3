import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from construction import random_base  # noqa: E402


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def ensemble_factory():
    """random_base with a per-call seed."""
    def make(n, d, seed=0):
        return random_base(n, d, seed)
    return make
