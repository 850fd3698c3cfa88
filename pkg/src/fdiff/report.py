from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Any

DEFAULT_SEED = 0xD1FF


@dataclass
class Report:
    name: str
    passed: bool = True
    witnesses: list = field(default_factory=list)
    params: dict = field(default_factory=dict)
    details: dict = field(default_factory=dict)
    timing: float = 0.0
    note: str = ""

    def fail(self, witness: Any, limit: int = 5) -> None:
        self.passed = False
        if len(self.witnesses) < limit:
            self.witnesses.append(witness)

    def merge(self, other: "Report") -> "Report":
        if not other.passed:
            self.passed = False
            self.witnesses.extend({"in": other.name, "witness": w} for w in other.witnesses[:3])
        return self

    @property
    def status(self) -> str:
        return "pass" if self.passed else "fail"

    def to_dict(self, timing: bool = False) -> dict:
        d = {
            "name": self.name,
            "status": self.status,
            "params": self.params,
            "witnesses": self.witnesses,
            "details": self.details,
        }
        if self.note:
            d["note"] = self.note
        if timing:
            d["timing"] = round(self.timing, 4)
        return d

    def __bool__(self) -> bool:
        return self.passed


class timed:
    """Context manager stamping elapsed wall time onto a report."""

    def __init__(self, report: Report):
        self.report = report

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self.report

    def __exit__(self, *exc):
        self.report.timing = time.perf_counter() - self.t0
        return False
