"""Check reports returned by every verification routine."""

from __future__ import annotations

import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Any

PASS = "pass"
FAIL = "fail"
INDETERMINATE = "indeterminate"


@dataclass
class CheckResult:
    name: str
    verdict: str
    witness: Any = None
    certificate: Any = None
    detail: str = ""
    timing: float = 0.0

    @property
    def passed(self) -> bool:
        return self.verdict == PASS

    def to_json(self, include_timing: bool = False) -> dict:
        out = {"name": self.name, "verdict": self.verdict}
        if self.detail:
            out["detail"] = self.detail
        if self.witness is not None:
            out["witness"] = self.witness
        if self.certificate is not None:
            out["certificate"] = self.certificate
        if include_timing:
            out["timing"] = round(self.timing, 6)
        return out


@dataclass
class Report:
    command: str
    entries: list = field(default_factory=list)
    data: dict = field(default_factory=dict)

    def add(self, name, verdict, witness=None, certificate=None, detail="", timing=0.0) -> CheckResult:
        if isinstance(verdict, bool):
            verdict = PASS if verdict else FAIL
        entry = CheckResult(name, verdict, witness, certificate, detail, timing)
        self.entries.append(entry)
        return entry

    @contextmanager
    def timed(self, name):
        """Time a block; the block sets ``box['verdict']`` and optional fields."""
        box = {"verdict": INDETERMINATE}
        start = time.perf_counter()
        try:
            yield box
        finally:
            self.add(name, box.pop("verdict"), timing=time.perf_counter() - start, **box)

    def extend(self, other: "Report", prefix: str = "") -> None:
        for e in other.entries:
            self.entries.append(CheckResult(prefix + e.name, e.verdict, e.witness,
                                            e.certificate, e.detail, e.timing))

    def __getitem__(self, name) -> CheckResult:
        for e in self.entries:
            if e.name == name:
                return e
        raise KeyError(name)

    def names(self) -> list:
        return [e.name for e in self.entries]

    @property
    def status(self) -> str:
        verdicts = {e.verdict for e in self.entries}
        if FAIL in verdicts:
            return FAIL
        if INDETERMINATE in verdicts:
            return INDETERMINATE
        return PASS

    @property
    def ok(self) -> bool:
        return self.status == PASS

    def failures(self) -> list:
        return [e for e in self.entries if e.verdict == FAIL]

    def to_json(self, include_timing: bool = False) -> dict:
        out = {
            "command": self.command,
            "status": self.status,
            "checks": [e.to_json(include_timing) for e in sorted(self.entries, key=lambda e: e.name)],
        }
        if self.data:
            out["data"] = self.data
        return out

    def to_text(self) -> str:
        lines = [f"{self.command}: {self.status.upper()}"]
        for e in sorted(self.entries, key=lambda e: e.name):
            line = f"  [{e.verdict:>13}] {e.name}"
            if e.detail:
                line += f" -- {e.detail}"
            lines.append(line)
            if e.witness is not None:
                lines.append(f"      witness: {e.witness}")
        return "\n".join(lines)
