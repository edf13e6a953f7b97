import numpy as np
import pytest

from core.coefficients import OperatorSymbol, VectorPolynomial, random_symbol, random_vector


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def _make_symbol(seed, dim, degree, real=False):
    return random_symbol(np.random.default_rng(seed), dim, degree, real=real)


def _make_vector(seed, dim, degree, real=False):
    return random_vector(np.random.default_rng(seed), dim, degree, real=real)


@pytest.fixture
def make_symbol():
    return _make_symbol


@pytest.fixture
def make_vector():
    return _make_vector


@pytest.fixture
def scalar():
    def build(*values):
        return OperatorSymbol.scalar(values)
    return build


@pytest.fixture
def scalar_vector():
    def build(*values):
        return VectorPolynomial.scalar(values)
    return build
