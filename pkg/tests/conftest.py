"""Prints one pass/fail line per acceptance criterion at the end of the run."""

import pytest


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker and report.when == "call":
        number, title = marker.args
        report.user_properties.append(("criterion", (number, title)))


def pytest_terminal_summary(terminalreporter):
    rows = {}
    for key in ("passed", "failed"):
        for report in terminalreporter.stats.get(key, []):
            for name, value in getattr(report, "user_properties", []):
                if name == "criterion":
                    rows[value[0]] = (value[1], report.outcome.upper(), report.duration)
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(rows):
        title, outcome, duration = rows[number]
        terminalreporter.write_line(f"criterion {number}: {outcome:6} {title} ({duration:.2f}s)")
