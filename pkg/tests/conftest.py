import numpy as np
import pytest

from isowreath.fields import Grid2


@pytest.fixture
def grid33():
    return Grid2.square(-1.0, 1.0, 33)


@pytest.fixture
def rng():
    return np.random.default_rng(20261016)
