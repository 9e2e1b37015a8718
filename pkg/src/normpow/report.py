"""Structured pass/fail records shared by the verification suites."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any


def _jsonable(value):
    if isinstance(value, float):
        if math.isnan(value) or math.isinf(value):
            return repr(value)
        return value
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if hasattr(value, "tolist"):
        return _jsonable(value.tolist())
    if hasattr(value, "item"):
        return value.item()
    return value


@dataclass(frozen=True)
class Violation:
    params: dict
    lhs: Any
    rhs: Any
    gap: Any

    def sort_key(self):
        return json.dumps(_jsonable(self.params), sort_keys=True)

    def to_dict(self):
        return {
            "params": _jsonable(self.params),
            "lhs": _jsonable(self.lhs),
            "rhs": _jsonable(self.rhs),
            "gap": _jsonable(self.gap),
        }


@dataclass
class VerifyReport:
    """Outcome of one verification suite.

    ``worst_margin`` is the smallest slack seen over all cases; a case
    violates when its slack drops below ``-tolerance``.  For suites that
    compare values of very different magnitudes the slack is measured
    relative to the local scale, so ``tolerance`` is dimensionless there.
    """

    suite_name: str
    cases_run: int = 0
    violations: list = field(default_factory=list)
    worst_margin: float = math.inf
    seed: int | None = None
    tolerance: float = 0.0
    stats: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.violations

    def record(self, margin, params, lhs, rhs, tolerance=None):
        """Count one case; store a violation if ``margin < -tolerance``."""
        tol = self.tolerance if tolerance is None else tolerance
        self.cases_run += 1
        if margin < self.worst_margin:
            self.worst_margin = margin
        if margin < -tol:
            self.violations.append(Violation(dict(params), lhs, rhs, margin))
            return False
        return True

    def merge(self, other: VerifyReport, name: str | None = None) -> VerifyReport:
        merged = VerifyReport(
            suite_name=name or f"{self.suite_name}+{other.suite_name}",
            cases_run=self.cases_run + other.cases_run,
            violations=sorted(self.violations + other.violations,
                              key=Violation.sort_key),
            worst_margin=min(self.worst_margin, other.worst_margin),
            seed=self.seed if self.seed is not None else other.seed,
            tolerance=max(self.tolerance, other.tolerance),
        )
        merged.stats = {**self.stats, **other.stats}
        return merged

    def to_dict(self):
        return {
            "suite": self.suite_name,
            "passed": self.passed,
            "cases_run": self.cases_run,
            "worst_margin": _jsonable(self.worst_margin),
            "tolerance": self.tolerance,
            "seed": self.seed,
            "violations": [v.to_dict() for v in
                           sorted(self.violations, key=Violation.sort_key)],
            "stats": _jsonable(self.stats),
        }

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        line = (f"{status} {self.suite_name}: {self.cases_run} cases, "
                f"{len(self.violations)} violations, "
                f"worst margin {self.worst_margin:.3g}")
        if self.violations:
            first = sorted(self.violations, key=Violation.sort_key)[0]
            line += f"; first: {first.params}"
        return line


def merge_reports(reports, name="all") -> VerifyReport:
    reports = list(reports)
    if not reports:
        return VerifyReport(suite_name=name)
    out = reports[0]
    for r in reports[1:]:
        out = out.merge(r)
    out.suite_name = name
    return out
