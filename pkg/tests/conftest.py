"""Shared pytest hooks: collect and print the acceptance summary."""

import pytest

ACCEPTANCE_LINES = []


@pytest.fixture
def record_criterion():
    """Record one pass/fail line per acceptance clause, then assert it."""
    def rec(tag, ok, detail=""):
        mark = "PASS" if ok else "FAIL"
        ACCEPTANCE_LINES.append(f"[{tag}] {mark}  {detail}".rstrip())
        assert ok, f"{tag}: {detail}"
    return rec


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
