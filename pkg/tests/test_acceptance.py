"""Acceptance criteria 1-12, one test each.  Every test prints a PASS/FAIL line."""

import json
import subprocess
import sys
import time

import pytest

from kstab.acceptance import CRITERIA, run_criterion

LINES: list[str] = []


@pytest.mark.parametrize("number", [c[0] for c in CRITERIA], ids=[f"criterion_{c[0]:02d}" for c in CRITERIA])
def test_criterion(number):
    result = run_criterion(number)
    LINES.append(result.line())
    print(result.line())
    for check in result.checks:
        assert check.passed, f"{check.name}: expected {check.expected!r}, got {check.actual!r}"
    assert result.within_budget, f"took {result.elapsed_s:.2f}s, budget {result.budget_s}s"


def test_criterion_12_verify_all():
    t0 = time.perf_counter()
    proc = subprocess.run([sys.executable, "-m", "kstab", "verify-all", "--quiet"], capture_output=True, text=True)
    elapsed = time.perf_counter() - t0
    report = json.loads(proc.stdout)
    ok = proc.returncode == 0 and elapsed < 120 and len(report["outputs"]["criteria"]) == 11
    line = f"[{'PASS' if ok else 'FAIL'}] criterion 12: verify-all end to end (exit {proc.returncode}, {elapsed:.2f}s)"
    LINES.append(line)
    print(line)
    assert proc.returncode == 0, proc.stderr
    assert elapsed < 120
    assert all(c["pass"] for c in report["checks"])
