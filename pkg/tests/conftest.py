"""Shared pytest wiring: the acceptance marker and its terminal reporting."""

from __future__ import annotations

import pytest


def pytest_configure(config):
    config.addinivalue_line(
        "markers",
        "acceptance(label): criterion of the acceptance gate; each gets one "
        "visible [ACCEPTANCE] PASS/FAIL line on the terminal",
    )


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    if report.when != "call":
        return
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    status = "PASS" if report.passed else "FAIL"
    reporter = item.config.pluginmanager.get_plugin("terminalreporter")
    if reporter is not None:
        reporter.ensure_newline()
        reporter.write_line(f"[ACCEPTANCE] {marker.args[0]}: {status}")
