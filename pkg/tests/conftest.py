import pytest

from ring_ladder.items import QubitParams, SystemParams


@pytest.fixture
def undriven():
    """lambda_rho = 10, Delta = 0: critical imbalance Zc = 0.6."""
    return SystemParams(lambda_rho=10.0, delta=0.0)


@pytest.fixture
def driven():
    return SystemParams(lambda_rho=10.0, delta=1.0)


@pytest.fixture
def rabi():
    return SystemParams(lambda_rho=0.0, delta=2.0)


@pytest.fixture
def qubit_params():
    return QubitParams()


@pytest.fixture
def rng():
    import numpy as np

    return np.random.default_rng(0)
