import numpy as np
import pytest

from lorentz_ellipsoid.surface import EllipsoidShape


@pytest.fixture
def shape():
    return EllipsoidShape(4.0, 2.0, 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
