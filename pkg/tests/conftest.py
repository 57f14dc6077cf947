import numpy as np
import pytest
from hypothesis import settings

from dgnm.grid import build_ball_grid

settings.register_profile("default", deadline=None, max_examples=25)
settings.load_profile("default")


@pytest.fixture(scope="session")
def grid2():
    return build_ball_grid(2, 16)


@pytest.fixture(scope="session")
def grid3():
    return build_ball_grid(3, 16)


@pytest.fixture(scope="session")
def grid64():
    return build_ball_grid(3, 64)


def bump(center, width=0.5, height=1.0, offset=1.0):
    center = np.asarray(center, dtype=float)

    def g(x):
        return offset + height * np.exp(-np.sum((x - center) ** 2, axis=1) / (2 * width**2))

    return g
