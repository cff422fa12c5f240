import pytest

from orbtherm import jacobian_exact, solve_steady, synthetic_eclipse_profile
from orbtherm.datasets import ten_node_const_profile, ten_node_model


@pytest.fixture(scope="session")
def moon():
    return ten_node_model()


@pytest.fixture(scope="session")
def moon_const(moon):
    return ten_node_const_profile(moon)


@pytest.fixture(scope="session")
def moon_steady(moon, moon_const):
    return solve_steady(moon, moon_const.means)


@pytest.fixture(scope="session")
def moon_J(moon, moon_steady):
    return jacobian_exact(moon, moon_steady.temperatures)


@pytest.fixture(scope="session")
def smooth_profile(moon):
    return synthetic_eclipse_profile(moon)


@pytest.fixture(scope="session")
def hard_profile(moon):
    return synthetic_eclipse_profile(moon, hard_steps=True)


def pytest_terminal_summary(terminalreporter):
    from helpers import ACCEPTANCE
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE):
            terminalreporter.write_line(line)
