import re
from collections import defaultdict

import pytest

CRITERIA = {
    1: "kernel moments: quadrature vs closed forms",
    2: "small-bandwidth limit of the normalizing constants",
    3: "density estimate: mass, positivity, rotation, kernel scaling",
    4: "pointwise bias and variance vs leading-term oracles",
    5: "MISE rate at the AMISE bandwidth",
    6: "AMISE bandwidth formula vs grid minimizer",
    7: "local linear weight identities and closed form",
    8: "local design spread asymptotics",
    9: "population bias rate of LC and LL",
    10: "empirical regression rates and LL vs LC",
    11: "metric-space axioms and Frechet mean closed forms",
    12: "simulate reports byte-identical across thread counts",
}

_NOTES = defaultdict(list)
_OUTCOMES = defaultdict(list)


@pytest.fixture
def acceptance(request):
    def record(criterion, text):
        _NOTES[criterion].append(text)
    return record


def _criterion_of(nodeid):
    m = re.search(r"test_acceptance\.py::test_c(\d\d)_", nodeid)
    return int(m.group(1)) if m else None


def pytest_runtest_logreport(report):
    c = _criterion_of(report.nodeid)
    if c is None:
        return
    if report.when == "call" or report.outcome != "passed":
        _OUTCOMES[c].append(report.outcome)


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for c, title in CRITERIA.items():
        outcomes = _OUTCOMES.get(c)
        if not outcomes:
            status = "NOT RUN"
        elif all(o == "passed" for o in outcomes):
            status = "PASS"
        else:
            status = "FAIL"
        tr.write_line(f"criterion {c:2d} {status:7s} {title}")
        for note in _NOTES.get(c, []):
            tr.write_line(f"    {note}")
