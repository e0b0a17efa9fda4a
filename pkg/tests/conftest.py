import pytest

from relmono import acceptance as acc
from relmono.numerics import Tolerance


@pytest.fixture(scope="session")
def tol():
    return Tolerance()


@pytest.fixture(scope="session")
def legendre():
    return acc.legendre()


@pytest.fixture(scope="session")
def fiber_product():
    return acc.fiber_product()


@pytest.fixture(scope="session")
def cz_cover():
    return acc.cz_cover()


@pytest.fixture(scope="session")
def thin_cover():
    return acc.thin_cover()
