import pytest

_ACCEPTANCE = []


@pytest.fixture
def acceptance():
    """Record one pass/fail line for an acceptance criterion, then assert it."""
    def report(number, name, ok, detail, seconds):
        line = f"{'PASS' if ok else 'FAIL'}  criterion {number:>2}  {name}: {detail} ({seconds:.1f}s)"
        _ACCEPTANCE.append((number, line))
        print(line)
        assert ok, line
    return report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(_ACCEPTANCE):
            terminalreporter.write_line(line)
