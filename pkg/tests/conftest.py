import numpy as np
import pytest

from lib.exact_solutions import EQUATOR, make_reissner_nordstrom, make_schwarzschild, make_synthetic_collapse


@pytest.fixture(autouse=True)
def single_thread(monkeypatch):
    monkeypatch.setenv('CONFHOR_THREADS', '1')


@pytest.fixture(scope="session")
def schwarzschild():
    return make_schwarzschild(1.0)


@pytest.fixture(scope="session")
def rn_sub():
    return make_reissner_nordstrom(1.0, 0.5)


@pytest.fixture(scope="session")
def synthetic():
    return make_synthetic_collapse()


@pytest.fixture
def synthetic_samples(synthetic):
    """A small (L, r, θ, φ) grid inside the synthetic chart."""
    L = np.array([-2.0, -0.5, -0.1])
    r = np.array([1.2, 2.0, 4.0])
    grid = np.array([[l, rho, EQUATOR[0], EQUATOR[1]] for l in L for rho in r])
    return grid
