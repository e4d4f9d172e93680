import math
import os

os.environ.setdefault('CAPILLARY_ENV', 'testing')

import numpy as np
import pytest

from services.immersion import build_surface


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope='session')
def hemisphere():
    """Unit Euclidean hemisphere standing on the plane, n = 2"""
    return build_surface('euclid', 2, 1.0, math.pi / 2, 16)


@pytest.fixture(scope='session')
def euclid_cap():
    """Unit sphere cut by the plane at contact angle pi/3"""
    return build_surface('euclid', 2, 1.0, math.pi / 3, 16)


@pytest.fixture(scope='session')
def euclid_cap_3d():
    return build_surface('euclid', 3, 1.0, 2 * math.pi / 3, 12)


@pytest.fixture(scope='session')
def horoball_cap():
    """Hyperbolic cap with principal curvatures 2 over the horosphere x_3 = 1"""
    return build_surface('horoball', 2, 2.0, math.pi / 3, 16)


@pytest.fixture(scope='session')
def horoball_cap_3d():
    return build_surface('horoball', 3, 2.0, math.pi / 2, 12)


@pytest.fixture(scope='session')
def perturbed_euclid():
    return build_surface('euclid', 2, 1.0, math.pi / 2, 16, 0.05, 2)


@pytest.fixture(scope='session')
def perturbed_horoball():
    return build_surface('horoball', 2, 2.0, math.pi / 2, 16, 0.05, 2)
