"""Shared fixtures plus the acceptance report hook.

test_acceptance.py appends one line per criterion to ACCEPTANCE_LINES; the
terminal-summary hook prints them after the run so the pass/fail table shows
even when every test passes.
"""

import pytest

ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def acceptance_lines():
    return ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LINES:
        terminalreporter.write_line(line)
