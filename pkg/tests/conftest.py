import os
import sys
from fractions import Fraction

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, derandomize=True,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

sys.path.insert(0, os.path.dirname(__file__))


@pytest.fixture(scope="session")
def ctx3():
    from mnfield import MNContext
    return MNContext(3)


@pytest.fixture(scope="session")
def ctx5():
    from mnfield import MNContext
    return MNContext(5)


def F(x, y=1):
    return Fraction(x, y)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if mod and mod.LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(mod.LINES):
            terminalreporter.write_line(line)
