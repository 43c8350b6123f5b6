import numpy as np
import pytest

from poschl_teller.littlewood_paley import build_dyadic_system
from poschl_teller.numerics import FunctionSample, Grid

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def grid():
    return Grid()


@pytest.fixture(scope="session")
def small_grid():
    return Grid(-25.0, 25.0, 1251)


@pytest.fixture(scope="session")
def sqrt_system():
    return build_dyadic_system("sqrt-partition")


@pytest.fixture(scope="session")
def shifted_system():
    return build_dyadic_system("shifted-sqrt")


@pytest.fixture
def gaussian():
    def make(grid, width=1.0, center=0.0):
        return FunctionSample.from_callable(grid, lambda x: np.exp(-((x - center) ** 2) / (2 * width ** 2)))

    return make


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
