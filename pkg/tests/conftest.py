import pytest

from charbox import BasisMatrix, cached_field


@pytest.fixture(scope="session")
def f5():
    return cached_field(5, 1)


@pytest.fixture(scope="session")
def f25():
    return cached_field(5, 2, modulus=[2, 0, 1])


@pytest.fixture(scope="session")
def f31_2():
    return cached_field(31, 2, seed=0)


@pytest.fixture(scope="session")
def f31_3():
    return cached_field(31, 3, seed=0)


@pytest.fixture(scope="session")
def f61_2():
    return cached_field(61, 2, seed=0)


@pytest.fixture(scope="session")
def id_basis_31_2(f31_2):
    return BasisMatrix.identity(f31_2)


@pytest.fixture(scope="session")
def id_basis_31_3(f31_3):
    return BasisMatrix.identity(f31_3)
