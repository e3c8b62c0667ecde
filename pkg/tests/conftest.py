import numpy as np
import pytest

from ptatsense import default_config


@pytest.fixture(scope="session")
def cfg():
    return default_config()


@pytest.fixture(scope="session")
def temps():
    return np.arange(0.0, 101.0, 1.0)


ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    """``criterion(n, ok, detail)`` records one PASS/FAIL line, prints it and asserts ``ok``."""

    def check(n, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'}  criterion {n:2d}: {detail}"
        ACCEPTANCE_LINES.append((n, line))
        print(line)
        assert ok, line

    return check


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
