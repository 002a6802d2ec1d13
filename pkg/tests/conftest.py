import pytest

# Acceptance outcomes, filled by test_acceptance.py: criterion -> (passed, detail).
ACCEPTANCE = {}


def record(criterion, passed, detail=""):
    ACCEPTANCE[criterion] = (passed, detail)


@pytest.hookimpl(trylast=True)
def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for criterion in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[criterion]
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  criterion {criterion}: {detail}")
