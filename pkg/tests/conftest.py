"""Per-criterion pass/fail summary for the acceptance gate."""
import re

CRITERIA = {
    1: "closed form vs simulation on the linear benchmark (<= 1e-6 pu, <= 5 s)",
    2: "case-study steady states (nominal, constant bias, amplification)",
    3: "RK4 step-halving error ratio >= 8",
    4: "relay thresholds: one trip each, t_trip = first violation + dwell",
    5: "DC-attack increment sign over 1000 random states",
    6: "omega_from_vdc strictly increasing, zero at reference",
    7: "finite-difference dtheta/dt vs phi*dw within 1e-6 relative",
    8: "fixture outcomes (trips and portrait samples)",
    9: "byte-identical repeated runs",
}
_PATTERN = re.compile(r"test_acceptance\.py::test_criterion_(\d+)_")
_results = {}


def pytest_runtest_logreport(report):
    m = _PATTERN.search(report.nodeid)
    if not m:
        return
    if report.when == "call" or report.failed:
        _results.setdefault(int(m.group(1)), []).append((report.nodeid, report.passed))


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for number, text in CRITERIA.items():
        outcomes = _results.get(number)
        if outcomes is None:
            continue
        failed = [nodeid.split("::", 1)[1] for nodeid, ok in outcomes if not ok]
        status = "PASS" if not failed else "FAIL"
        line = f"criterion {number}: {status}  {text}"
        if failed:
            line += f"  [failing: {', '.join(failed)}]"
        tr.write_line(line)
