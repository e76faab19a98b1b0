"""Prints one pass/fail line per acceptance criterion after the run."""

from __future__ import annotations

import sys


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    outcomes: dict[str, str] = {}
    for status in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(status, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance.py" not in nodeid:
                continue
            if getattr(rep, "when", "call") != "call" and status != "error":
                continue
            name = nodeid.rsplit("::", 1)[-1]
            outcomes[name] = "PASS" if status == "passed" else "FAIL"
    if not outcomes:
        return
    mod = sys.modules.get("test_acceptance")
    details = getattr(mod, "DETAILS", {}) if mod else {}
    criteria = getattr(mod, "CRITERIA", {}) if mod else {}
    terminalreporter.section("acceptance criteria")
    for name in sorted(outcomes):
        cid = name.split("_")[1].upper()
        line = details.get(cid) or criteria.get(cid, name)
        terminalreporter.write_line(f"{cid} {outcomes[name]}  {line}")
