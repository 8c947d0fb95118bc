"""Shared pytest plumbing.

The acceptance tests register one verdict line per criterion; echo them in
the terminal summary so they are visible even when output capture is on.
"""

VERDICTS: list[str] = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in VERDICTS:
            terminalreporter.line(line)
