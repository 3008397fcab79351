import numpy as np
import pytest

from holderlab.systems import SystemSpec


@pytest.fixture
def cat():
    return SystemSpec("linear_anosov")


@pytest.fixture
def perturbed():
    return SystemSpec("perturbed_anosov", delta=0.01)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
