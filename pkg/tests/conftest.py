import pytest

CRITERIA: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def criterion():
    """Record a pass/fail line for one acceptance criterion and print it immediately."""

    def record(number: int, ok: bool, detail: str) -> None:
        CRITERIA[number] = (ok, detail)
        print(f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}")

    return record


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(CRITERIA):
        ok, detail = CRITERIA[number]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}")
