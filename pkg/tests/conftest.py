import math

import pytest

from qmarket.phase import make_grid
from qmarket.risk import RiskParams


@pytest.fixture
def unit():
    return RiskParams()


@pytest.fixture
def grid():
    return make_grid(-10, 10, 1024)


@pytest.fixture
def wide_grid():
    return make_grid(-20, 20, 2048)


def std_normal_cdf(x: float) -> float:
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))
