import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from commitment_lab import build_matching_pennies, build_stop_light, build_stop_light_device  # noqa: E402


@pytest.fixture
def stop_light():
    return build_stop_light()


@pytest.fixture
def device():
    return build_stop_light_device()


@pytest.fixture
def pennies():
    return build_matching_pennies()


ACCEPTANCE_LINES = []


@pytest.fixture
def criterion():
    """Record one acceptance line, then assert it."""

    def check(number, ok, message):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {message}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line

    return check


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split(":")[0].split()[1])):
            terminalreporter.write_line(line)
