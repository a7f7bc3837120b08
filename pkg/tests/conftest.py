import numpy as np
import pytest

from serre1d.grid import BoundarySpec, make_grid


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def still_grid():
    return make_grid(0.0, 10.0, 20)


@pytest.fixture
def still_bc():
    return BoundarySpec(1.0, 0.0, 1.0, 0.0)
