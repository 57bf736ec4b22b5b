from __future__ import annotations

import re


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import TITLES

    rows = {}
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            m = re.search(r"test_acceptance\.py::test_criterion_(\d+)_", getattr(rep, "nodeid", ""))
            if m and rep.when == "call" or (m and outcome == "error"):
                rows[int(m.group(1))] = (outcome, rep.duration)
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(TITLES):
        outcome, secs = rows.get(n, ("not run", 0.0))
        status = {"passed": "PASS", "failed": "FAIL", "error": "FAIL"}.get(outcome, "NOT RUN")
        terminalreporter.write_line(f"criterion {n}: {status} ({secs:.2f}s) {TITLES[n]}")
