import numpy as np
import pytest

from gclab.generators import (
    MarkovChainSpec,
    make_gaussian_ar1,
    make_iid_uniform,
    make_markov_chain,
)


@pytest.fixture(scope="session")
def two_state_spec():
    return MarkovChainSpec.make([[0.9, 0.1], [0.2, 0.8]], [0.0, 1.0])


@pytest.fixture(scope="session")
def two_state_model(two_state_spec):
    return make_markov_chain(two_state_spec)


@pytest.fixture(scope="session")
def ar1_model():
    return make_gaussian_ar1(0.6)


@pytest.fixture(scope="session")
def iid_model():
    return make_iid_uniform()


@pytest.fixture(scope="session")
def uniform_cdf():
    return lambda x: np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
