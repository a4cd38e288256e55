"""Project-wide pytest hooks."""

from helpers import ACCEPTANCE_RESULTS


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_sep("=", "ACCEPTANCE CRITERIA")
    for number, title, status, detail in sorted(ACCEPTANCE_RESULTS):
        extra = f" ({detail})" if detail else ""
        terminalreporter.write_line(f"criterion {number:2d} {status:<4} {title}{extra}")
