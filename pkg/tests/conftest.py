"""Shared pytest plumbing for the suite.

test_acceptance.py registers one verdict per acceptance criterion through
record_criterion; after the run a summary block prints one PASS/FAIL line
per criterion (criteria whose test crashed before recording show NOT RUN).
"""

_EXPECTED_CRITERIA = range(1, 9)
_CRITERIA = {}


def record_criterion(number, passed, detail):
    """Store the verdict of one acceptance criterion for the summary block."""
    _CRITERIA[int(number)] = (bool(passed), str(detail))


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in _EXPECTED_CRITERIA:
        if number in _CRITERIA:
            passed, detail = _CRITERIA[number]
            verdict = "PASS" if passed else "FAIL"
        else:
            verdict, detail = "NOT RUN", "test did not reach its verdict"
        terminalreporter.write_line(
            f"ACCEPTANCE: criterion {number} {verdict} - {detail}")
