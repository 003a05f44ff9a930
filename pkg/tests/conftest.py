import pytest

_ACCEPTANCE_LINES = []


@pytest.fixture
def report():
    """Record one PASS/FAIL line; also printed immediately (visible with -s)."""

    def _report(criterion, passed, detail):
        line = f"{'PASS' if passed else 'FAIL'}  criterion {criterion}: {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)
        return passed

    return _report


@pytest.fixture
def note():
    """Record an informational line shown alongside the criterion results."""

    def _note(text):
        _ACCEPTANCE_LINES.append(f"INFO  {text}")
        print(text)

    return _note


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
