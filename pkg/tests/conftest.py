import numpy as np
import pytest

from support import random_dataset


@pytest.fixture
def rng():
    return np.random.default_rng(20260814)


@pytest.fixture
def small_ds(rng):
    return random_dataset(rng, n=240, d=6, c=4)
