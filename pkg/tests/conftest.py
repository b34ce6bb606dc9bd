from __future__ import annotations

from collections import defaultdict

import pytest

CRITERIA = {
    1: "Case A resonance values (R_L, T_L) from the general solver",
    2: "FIPR: R_L = 1 on the whole grid, T_L(0) = 1",
    3: "phase switching at resonance, G = kappa/2",
    4: "oracle triangle over 200 stable random draws",
    5: "reflection delay sign change at G = kappa, fast transmission",
    6: "decoupled reflection delay 2 kappa/(kappa^2 + delta^2)",
    7: "single-probe transmission ratio (kappa2/kappa1)^2",
    8: "left/right exchange symmetry at n = 1",
    9: "eigenvalues at G = 0 and the stored stable-G window",
    10: "figure datasets complete, deterministic, fast",
}

_outcomes: dict[int, list[bool]] = defaultdict(list)


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion number")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    if report.when == "call" or (report.when == "setup" and report.failed):
        _outcomes[marker.args[0]].append(report.passed)


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for number, label in CRITERIA.items():
        results = _outcomes.get(number)
        if not results:
            verdict = "NOT RUN"
        else:
            verdict = "PASS" if all(results) else "FAIL"
        terminalreporter.write_line(f"criterion {number:2d} {verdict:7s} {label}")
