import numpy as np
import pytest

from diracsea.lattice import LatticeConfig, build_basis

TWO_PI = 2.0 * np.pi


@pytest.fixture(scope="session")
def basis_n9():
    return build_basis(LatticeConfig(TWO_PI, 9, 1.0, 1.0))


@pytest.fixture(scope="session")
def basis_n5():
    return build_basis(LatticeConfig(TWO_PI, 5, 1.0, 1.0))


@pytest.fixture(scope="session")
def basis_n3():
    return build_basis(LatticeConfig(TWO_PI, 3, 1.0, 1.0))


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(1234)
