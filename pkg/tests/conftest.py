"""Collects acceptance outcomes and prints one line per criterion at the end of the run."""

import re
from collections import defaultdict

_results: dict[int, list] = defaultdict(list)


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    match = re.search(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)", report.nodeid)
    if not match:
        return
    detail = dict(report.user_properties).get("detail", "")
    _results[int(match.group(1))].append((match.group(2), report.passed, detail))


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_results):
        parts = _results[number]
        verdict = "PASS" if all(ok for _, ok, _ in parts) else "FAIL"
        notes = "; ".join(f"{name}: {'ok' if ok else 'failed'}{' (' + d + ')' if d else ''}" for name, ok, d in parts)
        terminalreporter.write_line(f"criterion {number}: {verdict} | {notes}")
