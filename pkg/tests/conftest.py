import pytest

from vpindex import ProblemInstance


@pytest.fixture(scope="session")
def ex1():
    """Three messages, receiver i knows only message i."""
    return ProblemInstance.from_one_based(3, [[1], [2], [3]])


@pytest.fixture(scope="session")
def chain3():
    """Three messages with receivers {}, {1}, {1,2}, {1,3}."""
    return ProblemInstance.from_one_based(3, [[], [1], [1, 2], [1, 3]])


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
