"""Named pass/fail records shared by reports."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    expected: object
    actual: object

    def as_dict(self) -> dict:
        return {"name": self.name, "pass": self.passed, "expected": self.expected, "actual": self.actual}
