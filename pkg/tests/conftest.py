import pytest

_RESULTS = []


@pytest.fixture
def criterion():
    """Record one acceptance line; ``record(label, ok, detail)`` returns ``ok``."""
    def record(label, ok, detail=""):
        _RESULTS.append((label, bool(ok), detail))
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for label, ok, detail in _RESULTS:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} {label}: {detail}")
