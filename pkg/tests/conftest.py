import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from alpha2dynamo.kernels import Grid  # noqa: E402

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def grid():
    return Grid(100.0, 8000)


@pytest.fixture(scope="session")
def coarse_grid():
    return Grid(100.0, 2000)


@pytest.fixture(scope="session")
def record():
    def _record(line: str):
        ACCEPTANCE_LINES.append(line)
        print(line)
    return _record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[0][3:].rstrip(":"))):
            terminalreporter.write_line(line)
