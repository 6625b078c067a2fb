import pytest

CRITERIA_LINES: list[str] = []


@pytest.fixture
def report():
    def _report(criterion, ok, detail=""):
        line = f"criterion {criterion}: {'PASS' if ok else 'FAIL'}  {detail}".rstrip()
        CRITERIA_LINES.append(line)
        print(line)
        return ok
    return _report


def pytest_terminal_summary(terminalreporter):
    if CRITERIA_LINES:
        terminalreporter.section("acceptance criteria")
        for line in CRITERIA_LINES:
            terminalreporter.write_line(line)
