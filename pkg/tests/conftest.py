"""Shared fixtures and the acceptance-summary reporter.

Acceptance tests register one line per criterion through the
``criterion`` context manager; the collected lines are printed in the
terminal summary so a plain ``pytest -v`` run always ends with an
explicit PASS/FAIL roster of the acceptance checks.
"""

from __future__ import annotations

from contextlib import contextmanager

_ACCEPTANCE_LINES: list[tuple[int, str]] = []


@contextmanager
def criterion(number: int, title: str):
    """Record PASS/FAIL for one acceptance criterion around its asserts."""
    try:
        yield
    except BaseException:
        _ACCEPTANCE_LINES.append((number, f"criterion {number} FAIL: {title}"))
        raise
    else:
        _ACCEPTANCE_LINES.append((number, f"criterion {number} PASS: {title}"))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_LINES:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for _, line in sorted(_ACCEPTANCE_LINES):
        terminalreporter.write_line(line)
