import math

import numpy as np
import pytest

from shearmhd.grid import Grid
from shearmhd.params import PhysicalParams


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def small_grid():
    return Grid(k_max=8, m_y=64, l_y=4 * math.pi, t_final=10.0)


@pytest.fixture
def params_r1():
    return PhysicalParams(nu=1e-5, mu=0.1, beta=1.0)


@pytest.fixture
def params_r2():
    return PhysicalParams(nu=0.02, mu=0.1, beta=1.0)


@pytest.fixture
def params_r3():
    return PhysicalParams(nu=0.5, mu=0.05, beta=1.0)
