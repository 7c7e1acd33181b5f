"""Shared fixtures for the iterreg test suite."""

import numpy as np
import pytest

from iterreg.problems import laplace_problem, synthetic_diagonal_problem


def random_psd(rng, n, low=0.05, high=2.0):
    """Symmetric positive definite Q diag(d) Q^T with d uniform in [low, high]."""
    Q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    d = rng.uniform(low, high, n)
    M = (Q * d) @ Q.T
    return 0.5 * (M + M.T)


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture
def make_psd(rng):
    def make(n, low=0.05, high=2.0):
        return random_psd(rng, n, low, high)

    return make


@pytest.fixture
def psd_matrices(rng):
    """Twenty random symmetric PSD matrices of sizes 3 to 8."""
    return [random_psd(rng, int(n)) for n in rng.integers(3, 9, size=20)]


@pytest.fixture
def well_conditioned(rng):
    return random_psd(rng, 6, low=0.5, high=2.0)


@pytest.fixture(scope="session")
def laplace16():
    return laplace_problem(16)


@pytest.fixture(scope="session")
def diagonal_problem():
    return synthetic_diagonal_problem(np.logspace(0, -4, 64))


@pytest.fixture(scope="session")
def laplace32():
    return laplace_problem(32)
