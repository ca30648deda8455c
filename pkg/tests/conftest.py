import pytest

_ACCEPTANCE = []


@pytest.fixture
def acceptance():
    """Record one PASS/FAIL line for an acceptance criterion."""

    def record(number, title, ok, elapsed, limit, detail=""):
        ok = bool(ok) and elapsed <= limit
        line = (f"{'PASS' if ok else 'FAIL'} [{number:2d}] {title}: {detail} "
                f"({elapsed:.1f} s, limit {limit:.0f} s)")
        _ACCEPTANCE.append((number, line))
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(_ACCEPTANCE):
        terminalreporter.write_line(line)
