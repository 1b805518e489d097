import pytest

_VERDICTS: list[str] = []


@pytest.fixture
def criterion():
    """Record one pass/fail line per acceptance criterion and assert it."""
    def check(label: str, ok: bool, detail: str) -> None:
        line = f"{'PASS' if ok else 'FAIL'}  {label}: {detail}"
        _VERDICTS.append(line)
        print(line)
        assert ok, line
    return check


def pytest_terminal_summary(terminalreporter):
    if _VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in _VERDICTS:
            terminalreporter.write_line(line)
