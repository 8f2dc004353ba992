import pytest

from shmlenf import catalog

ACCEPTANCE_LINES = []


@pytest.fixture
def cat():
    return catalog


@pytest.fixture
def criterion():
    """Record one pass/fail line per acceptance criterion."""
    def record(line):
        ACCEPTANCE_LINES.append(line)
        print(line)
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
