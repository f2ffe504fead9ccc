import pytest

_RESULTS: dict[int, tuple[str, bool, str]] = {}
CRITERIA = {
    1: "table reproduction",
    2: "two-regime threshold on table3",
    3: "covariance condition on table3 and form agreement",
    4: "impossibility screens",
    5: "sufficient conditions",
    6: "fairness guarantees",
    7: "optimizer against grid oracle",
    8: "monte carlo agreement",
    9: "variability sweep",
}


@pytest.fixture
def record():
    """Record the verdict for one acceptance criterion; printed at the end."""

    def _record(number: int, passed: bool, detail: str = ""):
        _RESULTS[number] = (CRITERIA[number], bool(passed), detail)
        print(f"criterion {number} ({CRITERIA[number]}): {'PASS' if passed else 'FAIL'} {detail}")

    return _record


def pytest_terminal_summary(terminalreporter):
    if not _RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, name in CRITERIA.items():
        if number in _RESULTS:
            _, passed, detail = _RESULTS[number]
            verdict = "PASS" if passed else "FAIL"
        else:
            verdict, detail = "FAIL", "(not reached)"
        terminalreporter.write_line(f"[{verdict}] {number}. {name} {detail}".rstrip())
