"""Echo the acceptance verdict lines after the run, outside capture."""

from __future__ import annotations

import sys


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    # read the module instance pytest actually ran, whatever its import name
    lines = []
    for name, mod in sys.modules.items():
        if name.rpartition(".")[2] == "test_acceptance" and mod is not None:
            lines = getattr(mod, "VERDICT_LINES", [])
            if lines:
                break
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
