import os
import sys

from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile(
    "default", max_examples=100, deadline=None, suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def pytest_terminal_summary(terminalreporter):
    """One PASS/FAIL line per acceptance criterion."""
    from test_acceptance import CRITERIA

    status = {}
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            name = getattr(rep, "nodeid", "")
            if "test_acceptance.py::test_criterion_" in name and rep.when == "call" or (outcome == "error" and "test_criterion_" in name):
                k = int(name.rsplit("_", 1)[1])
                status[k] = "PASS" if outcome == "passed" else "FAIL"
    if not status:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(status):
        terminalreporter.write_line(f"criterion {k:2d}: {status[k]}  {CRITERIA[k]}")
