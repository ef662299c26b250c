"""Shared test plumbing: collects acceptance verdict lines and prints them
as a terminal summary block, one line per criterion."""

import pytest

VERDICTS = []


@pytest.fixture(scope="session")
def verdicts():
    return VERDICTS


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if VERDICTS:
        terminalreporter.section("acceptance verdicts")
        for line in VERDICTS:
            terminalreporter.write_line(line)
