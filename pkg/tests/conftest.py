"""Shared test plumbing: the acceptance suite's verdict board.

Each acceptance test registers one PASS/FAIL line; they are replayed in a
terminal section at the end of the run so the verdicts survive output
capture.
"""

verdicts: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if verdicts:
        terminalreporter.section("acceptance criteria")
        for line in verdicts:
            terminalreporter.line(line)
