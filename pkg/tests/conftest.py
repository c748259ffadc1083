import numpy as np
import pytest

from dualcusum import discrete, gaussian


@pytest.fixture(scope="session")
def gauss():
    """N(-1/2, 1) in control, N(1/2, 1) out of control."""
    return gaussian(-0.5, 0.5, 1.0)


@pytest.fixture(scope="session")
def coin():
    return discrete([-1.0, 1.0], [0.7, 0.3], [0.3, 0.7])


@pytest.fixture(scope="session")
def three_point():
    return discrete([-1.0, 0.0, 1.0], [0.5, 0.3, 0.2], [0.2, 0.3, 0.5])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[number])
