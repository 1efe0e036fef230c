"""Shared fixtures and the acceptance-criteria terminal reporter."""
from __future__ import annotations

ACCEPTANCE_LINES: dict[int, str] = {}


def record_criterion(number: int, passed: bool, detail: str) -> None:
    """Store one criterion line for the end-of-run summary and print it now.

    Called before the test's assert so the line is visible even when the
    criterion fails (honest reds stay reported, not hidden by capture).
    """
    status = "PASS" if passed else "FAIL"
    line = f"criterion {number:2d}: {status}  {detail}"
    ACCEPTANCE_LINES[number] = line
    print(line, flush=True)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[number])
