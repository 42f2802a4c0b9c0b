import numpy as np
import pytest

from wiener_neumann.gaussian import GaussianModel


@pytest.fixture
def std1():
    return GaussianModel([1.0])


@pytest.fixture
def std2():
    return GaussianModel([1.0, 1.0])


@pytest.fixture
def aniso2():
    return GaussianModel([0.5, 0.25])


def circle_nodes(n=7):
    t = np.linspace(0, 2 * np.pi, n, endpoint=False)
    return np.stack([np.cos(t), np.sin(t)], axis=1), t
