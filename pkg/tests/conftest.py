import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from lingering.grid import gaussian, integrate, make_grid, sample_landscape
from lingering.motility import power
from lingering.perception import KernelShape, perceive

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


class Scenario:
    """Gaussian landscape, normalized bump R=1.5, power(1,2) motility."""

    def __init__(self, n=256, R=1.5, mode="normalized"):
        self.grid = make_grid(5.0, n)
        self.s = sample_landscape(gaussian(), self.grid)
        self.sbar = perceive(self.s, KernelShape("bump", R), mode)
        self.law = power(1.0, 2.0)
        self.M = integrate(self.s)


@pytest.fixture(scope="session")
def scen():
    return Scenario(256)


@pytest.fixture(scope="session")
def scen128():
    return Scenario(128)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# one line per acceptance criterion, printed after the run
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])
