import pytest

_ACCEPTANCE = []


@pytest.fixture
def acceptance():
    """Record a one-line verdict for the acceptance summary."""

    def record(number, ok, detail):
        _ACCEPTANCE.append((number, bool(ok), detail))
        print(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, ok, detail in sorted(_ACCEPTANCE, key=lambda r: r[0]):
        terminalreporter.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {number:>2}: {detail}")
