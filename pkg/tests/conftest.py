import pytest

# criterion number -> (passed, detail); filled by test_acceptance
VERDICTS: dict[int, tuple[bool, str]] = {}


@pytest.fixture
def verdict():
    def record(number: int, passed: bool, detail: str):
        VERDICTS[number] = (bool(passed), detail)

    return record


def pytest_terminal_summary(terminalreporter):
    if not VERDICTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(VERDICTS):
        passed, detail = VERDICTS[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}")
