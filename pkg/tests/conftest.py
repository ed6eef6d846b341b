import numpy as np
import pytest

ACCEPTANCE_LINES = []


@pytest.fixture
def report():
    """Record one acceptance line and assert the criterion."""

    def _report(criterion, passed, detail):
        line = f"{'PASS' if passed else 'FAIL'}  {criterion}: {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert passed, line

    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
