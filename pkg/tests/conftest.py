import numpy as np
import pytest

from memwave.core import Parameters


@pytest.fixture
def params():
    """Reference parameter set used throughout: beta=0.3, eta=1, a=b=0.1."""
    return Parameters(beta=0.3, eta=1.0, a=0.1, b=0.1)


@pytest.fixture
def rng():
    return np.random.default_rng(20260819)
