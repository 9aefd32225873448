import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

CRITERIA = {
    1: "Slick golden denotations",
    2: "stratified oracle equivalence",
    3: "reflection and extraction",
    4: "permission decidability and replay determinism",
    5: "trace invariants on bundled scenarios",
    6: "scenario end-to-end outcomes",
    7: "access mediation and correspondence",
}

_outcomes = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion exercised by the test")


def pytest_runtest_logreport(report):
    marker = getattr(report, "criterion", None)
    if marker is None:
        return
    failed = report.failed or (report.when == "call" and report.skipped)
    ok = _outcomes.get(marker, True)
    _outcomes[marker] = ok and not failed


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    m = item.get_closest_marker("criterion")
    if m is not None:
        outcome.get_result().criterion = m.args[0]


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_outcomes):
        verdict = "PASS" if _outcomes[n] else "FAIL"
        terminalreporter.write_line(f"criterion {n}: {verdict}  {CRITERIA.get(n, '')}")


@pytest.fixture(scope="session")
def scenario_runs():
    """Every bundled scenario (plus scenario3 without amy), run once per session."""
    from justact.agents import bundled_names, load_scenario, run_scenario

    runs = {name: run_scenario(load_scenario(name)) for name in bundled_names()}
    runs["scenario3-no-amy"] = run_scenario(load_scenario("scenario3", disabled=["amy"]))
    return runs
