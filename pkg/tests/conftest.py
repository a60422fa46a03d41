import pytest

from qmink import DeformationParams, Sector, SectorKind, build_operators
from qmink.hilbert import TruncationWindow

Q11 = DeformationParams(1.1)


@pytest.fixture(scope="session")
def p():
    return Q11


@pytest.fixture(scope="session")
def ops_space():
    return build_operators(
        Q11, Sector(SectorKind.SPACE, 1.0), TruncationWindow(3, -5, 5, -3, 3)
    )


@pytest.fixture(scope="session")
def ops_time():
    return build_operators(
        Q11, Sector(SectorKind.TIME_FORWARD, 1.0), TruncationWindow(3, 0, 7, -3, 3)
    )


@pytest.fixture(scope="session")
def ops_time_back():
    return build_operators(
        Q11, Sector(SectorKind.TIME_BACKWARD, 1.0), TruncationWindow(3, 0, 7, -3, 3)
    )


@pytest.fixture(scope="session")
def ops_light():
    return build_operators(
        Q11, Sector(SectorKind.LIGHT, 1.0), TruncationWindow(3, -5, 5, 0, 0)
    )
