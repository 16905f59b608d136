from __future__ import annotations

import os
import sys

sys.path.insert(0, os.path.dirname(__file__))

_acceptance: dict[str, str] = {}
_titles: dict[str, str] = {}
_notes: dict[str, str] = {}


def pytest_collection_modifyitems(items):
    for item in items:
        if item.path.name == "test_acceptance.py":
            doc = (item.function.__doc__ or item.name).strip().splitlines()[0]
            _titles[item.nodeid] = doc


def pytest_runtest_logreport(report):
    if report.nodeid not in _titles:
        return
    for key, value in report.user_properties:
        if key == "note":
            _notes[report.nodeid] = str(value)
    if report.when == "call" or report.failed:
        if report.failed:
            _acceptance[report.nodeid] = "FAIL"
        elif report.nodeid not in _acceptance:
            _acceptance[report.nodeid] = "PASS" if report.passed else "SKIP"


def pytest_terminal_summary(terminalreporter):
    if not _titles:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid, title in _titles.items():
        note = f"  [{_notes[nodeid]}]" if nodeid in _notes else ""
        terminalreporter.write_line(f"{_acceptance.get(nodeid, 'NOT RUN'):4}  {title}{note}")
