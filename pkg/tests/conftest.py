from pathlib import Path

import pytest

from startup_valuation.pipeline import BUNDLED_DATA

PAPER_DATA = BUNDLED_DATA / "paper"
ACCEPTANCE_LINES = []


@pytest.fixture
def paper_data() -> Path:
    return PAPER_DATA


@pytest.fixture
def acceptance():
    def record(number, description, ok):
        ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'}  criterion {number:>2}: {description}")
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
