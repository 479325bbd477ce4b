import numpy as np
import pytest

from blsg.grid import make_grid
from blsg.norms import BLNormParams
from blsg.profiles import jet_profile, synthetic_profile, tanh_profile


@pytest.fixture(scope="session")
def grid_std():
    return make_grid("chebyshev_mapped", 160, 30.0, 2.0)


@pytest.fixture(scope="session")
def grid_coarse():
    return make_grid("chebyshev_mapped", 96, 25.0, 2.0)


@pytest.fixture(scope="session")
def tanh_prof():
    return tanh_profile(1.0, 1.0)


@pytest.fixture(scope="session")
def jet_prof():
    # backflow configuration certified Rayleigh-unstable at alpha = 1
    return jet_profile(1.0, 3.0, 2.0)


@pytest.fixture(scope="session")
def const_prof():
    uc = 0.4
    return synthetic_profile(
        [lambda z, u=uc: np.full_like(np.asarray(z, dtype=float), u)]
        + [lambda z: np.zeros_like(np.asarray(z, dtype=float))] * 4,
        u_plus=uc, eta0=1.0)


@pytest.fixture()
def prm_std():
    return BLNormParams(beta=0.25, gamma=1.0, big_p=2.0, p=1, nu=1e-2)


@pytest.fixture()
def rng():
    return np.random.default_rng(42)
