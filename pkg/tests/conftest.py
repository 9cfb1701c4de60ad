import numpy as np
import pytest

from dnacap import validate_dmc

W0_MATRIX = np.array([
    [94, 2, 2, 2],
    [2, 70, 25, 3],
    [3, 2, 85, 10],
    [10, 5, 5, 80],
]) / 100.0

W1_MATRIX = np.array([
    [1, 2, 3, 4, 5],
    [4, 3, 2, 5, 1],
    [2, 5, 1, 3, 4],
    [3, 4, 5, 1, 2],
    [5, 1, 4, 2, 3],
]) / 15.0

W2_MATRIX = np.array([
    [1, 2, 3, 4, 1, 2, 3, 4],
    [2, 1, 4, 3, 2, 1, 4, 3],
    [3, 4, 1, 2, 3, 4, 2, 1],
    [4, 3, 2, 1, 4, 3, 1, 2],
]) / 20.0


@pytest.fixture(scope="session")
def w0():
    return validate_dmc(W0_MATRIX)


@pytest.fixture(scope="session")
def w1():
    return validate_dmc(W1_MATRIX)


@pytest.fixture(scope="session")
def w2():
    return validate_dmc(W2_MATRIX)


def random_dmc(rng, nx, ny, floor=0.0):
    rows = rng.dirichlet(np.ones(ny), size=nx)
    if floor > 0:
        rows = rows + floor
        rows /= rows.sum(axis=1, keepdims=True)
    return validate_dmc(rows)


def random_px(rng, n):
    return rng.dirichlet(np.ones(n))
