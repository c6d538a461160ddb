import numpy as np
import pytest

from sectorsum import MatrixOperator, certify_sector


def certified(matrix, angle) -> MatrixOperator:
    op = MatrixOperator(np.asarray(matrix, dtype=complex))
    certify_sector(op, angle)
    return op


@pytest.fixture(scope="session")
def diag14():
    return certified(np.diag([1.0, 4.0]), 0.9 * np.pi)


@pytest.fixture(scope="session")
def scalar1():
    return certified([[1.0]], 0.9 * np.pi)
