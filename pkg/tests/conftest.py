import os

import pytest
from hypothesis import HealthCheck, settings

from relpctl.domains import builtin_blocks_world, builtin_chemical_warehouse

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", max_examples=400, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def bw2():
    return builtin_blocks_world(2)


@pytest.fixture(scope="session")
def bw3():
    return builtin_blocks_world(3)


@pytest.fixture(scope="session")
def cw():
    return builtin_chemical_warehouse()


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
