"""
Verification report: one CheckResult per property check.
"""
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Literal, Optional, Union

import pandas as pd

Status = Literal["pass", "fail"]


@dataclass(frozen=True)
class CheckResult:
    name: str
    status: Status
    statistic: float
    threshold: float
    seed: int
    detail: str = ""

    @classmethod
    def at_most(cls, name: str, statistic: float, threshold: float, seed: int, detail: str = "") -> "CheckResult":
        return cls(name, "pass" if statistic <= threshold else "fail", float(statistic), float(threshold), seed, detail)

    @classmethod
    def at_least(cls, name: str, statistic: float, threshold: float, seed: int, detail: str = "") -> "CheckResult":
        return cls(name, "pass" if statistic >= threshold else "fail", float(statistic), float(threshold), seed, detail)

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def line(self) -> str:
        text = f"{self.status.upper():4s} {self.name}: statistic={self.statistic:.6g} threshold={self.threshold:.6g} seed={self.seed}"
        return f"{text} ({self.detail})" if self.detail else text

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "status": self.status,
            "statistic": self.statistic,
            "threshold": self.threshold,
            "seed": self.seed,
            "detail": self.detail,
        }


@dataclass
class VerificationReport:
    suite: str
    seed: int
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    @property
    def counts(self) -> tuple[int, int]:
        passed = sum(1 for check in self.checks if check.passed)
        return passed, len(self.checks) - passed

    def extend(self, other: "VerificationReport"):
        self.checks.extend(other.checks)

    def failures(self) -> list[CheckResult]:
        return [check for check in self.checks if not check.passed]

    def find(self, prefix: str) -> Optional[CheckResult]:
        return next((check for check in self.checks if check.name.startswith(prefix)), None)

    def to_json(self) -> dict:
        passed, failed = self.counts
        return {
            "suite": self.suite,
            "seed": self.seed,
            "passed": passed,
            "failed": failed,
            "checks": [check.to_json() for check in self.checks],
        }

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([check.to_json() for check in self.checks],
                            columns=["name", "status", "statistic", "threshold", "seed", "detail"])

    def save(self, path: Union[str, Path]):
        with open(path, "w") as f:
            json.dump(self.to_json(), f, indent=2, sort_keys=True)
            f.write("\n")

    def summary(self) -> str:
        passed, failed = self.counts
        lines = [check.line() for check in self.checks]
        lines.append(f"suite {self.suite}: {passed} passed, {failed} failed")
        return "\n".join(lines)
