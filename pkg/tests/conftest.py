import pytest

# acceptance verdicts collected by tests/test_acceptance.py, printed once at the end
ACCEPTANCE_LINES = []


@pytest.fixture
def verdict():
    def record(cid, title, ok, detail):
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {cid:>2}: {title} | {detail}"
        ACCEPTANCE_LINES.append(line)
        print(line)
        assert ok, line
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
