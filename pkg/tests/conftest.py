import math

import pytest

from qtransport.control import TransportSpec

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def record():
    """Log one acceptance line; the summary is printed at the end of the session."""

    def _record(criterion: str, passed: bool, detail: str):
        ACCEPTANCE_LINES.append(f"[{'PASS' if passed else 'FAIL'}] {criterion}: {detail}")
        return passed

    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def one_period():
    return TransportSpec(10.0, 2 * math.pi)
