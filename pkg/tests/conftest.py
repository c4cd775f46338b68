import numpy as np
import pytest

from accretive_flows import (
    dirichlet_laplacian_1d,
    make_almost_orbit,
    make_quartic_well,
    make_scaled_identity,
    make_spd_linear,
)


@pytest.fixture
def scaled_identity():
    return make_scaled_identity(1.0, 1)


@pytest.fixture
def spd_tridiag4():
    return make_spd_linear(dirichlet_laplacian_1d(4))


@pytest.fixture
def quartic():
    return make_quartic_well()


@pytest.fixture
def orbit_c1(scaled_identity):
    """Perturbed orbit u(t) = 2e^{-t} + 1/(1+t) used across the suite."""
    return make_almost_orbit(scaled_identity, [2.0], 1.0, [1.0])


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
