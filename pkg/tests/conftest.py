import numpy as np
import pytest

from roadnoma.config import SystemConfig


@pytest.fixture
def base_cfg():
    return SystemConfig()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
