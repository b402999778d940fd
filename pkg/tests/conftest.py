"""Shared test wiring: the acceptance-criteria summary printer."""

ACCEPTANCE_RESULTS = []


def record_criterion(number: int, passed: bool, detail: str = "") -> None:
    ACCEPTANCE_RESULTS.append((number, passed, detail))


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, passed, detail in sorted(ACCEPTANCE_RESULTS):
        flag = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"criterion {number:2d}: {flag}  {detail}")
