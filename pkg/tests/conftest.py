import pytest

# acceptance lines collected by test_acceptance.py, echoed after the run so
# they show up even when output capture is on
ACCEPTANCE: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])


@pytest.fixture
def acceptance():
    return ACCEPTANCE
