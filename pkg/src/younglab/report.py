"""Experiment reports: one row per checked case plus an aggregate."""

from __future__ import annotations

import math
from dataclasses import dataclass, field


@dataclass
class Case:
    case_id: int
    params: dict
    lhs: float
    rhs: float
    ratio: float
    passed: bool
    anchor: str
    error: str | None = None


@dataclass
class ExperimentReport:
    """Rows of an inequality sweep.

    ``ceiling`` bounds ``empirical_sup`` when set, or only the rows with
    anchor ``ceiling_anchor`` when that is given.  ``refinement_delta`` is
    filled by refinement studies.  ``checks`` holds suite-level pass/fail
    conditions that are not attached to a single row (trend slopes,
    monotonicity of a sequence, ...).
    """

    suite: str
    cases: list[Case] = field(default_factory=list)
    ceiling: float | None = None
    ceiling_anchor: str | None = None
    refinement_delta: float | None = None
    checks: dict[str, bool] = field(default_factory=dict)
    notes: dict = field(default_factory=dict)

    def add(self, params, lhs, rhs, anchor, passed=None, ratio=None, error=None) -> Case:
        if ratio is None:
            ratio = lhs / rhs if rhs else math.inf
        if passed is None:
            passed = error is None and math.isfinite(ratio)
        case = Case(len(self.cases), dict(params), float(lhs), float(rhs), float(ratio),
                    bool(passed), anchor, error)
        self.cases.append(case)
        return case

    def extend(self, other: "ExperimentReport", tag: bool = True):
        """Append the rows of ``other``; ``tag`` records its suite name in ``params``."""
        for c in other.cases:
            params = c.params | {"suite": other.suite} if tag else c.params
            self.add(params, c.lhs, c.rhs, c.anchor, passed=c.passed, ratio=c.ratio, error=c.error)
        for name, ok in other.checks.items():
            self.checks[f"{other.suite}:{name}"] = ok
        if other.ceiling is not None:
            self.checks[f"{other.suite}:ceiling"] = other.within_ceiling

    @property
    def count(self) -> int:
        return len(self.cases)

    @property
    def violations(self) -> int:
        return sum(not c.passed for c in self.cases)

    @property
    def empirical_sup(self) -> float:
        finite = [c.ratio for c in self.cases if math.isfinite(c.ratio)]
        return max(finite) if finite else math.nan

    def sup_by_anchor(self) -> dict[str, float]:
        out: dict[str, float] = {}
        for c in self.cases:
            if math.isfinite(c.ratio):
                out[c.anchor] = max(out.get(c.anchor, -math.inf), c.ratio)
        return out

    def sup_by_group(self, anchor: str | None = None) -> dict[str, float]:
        """Sup of ``ratio`` per ``(anchor, params["group"])``, optionally for one anchor."""
        out: dict[str, float] = {}
        for c in self.cases:
            if (anchor is not None and c.anchor != anchor) or not math.isfinite(c.ratio):
                continue
            key = c.anchor if "group" not in c.params else f"{c.anchor}|{c.params['group']}"
            out[key] = max(out.get(key, -math.inf), c.ratio)
        return out

    @property
    def checked_sup(self) -> float:
        """The supremum the ceiling applies to."""
        if self.ceiling_anchor is None:
            return self.empirical_sup
        return self.sup_by_anchor().get(self.ceiling_anchor, math.nan)

    @property
    def within_ceiling(self) -> bool:
        return self.ceiling is None or not (self.checked_sup > self.ceiling)

    @property
    def passed(self) -> bool:
        return self.violations == 0 and self.within_ceiling and all(self.checks.values())

    def aggregate(self) -> dict:
        return {
            "count": self.count,
            "violations": self.violations,
            "empirical_sup": self.empirical_sup,
            "sup_by_anchor": self.sup_by_anchor(),
            "ceiling": self.ceiling,
            "ceiling_anchor": self.ceiling_anchor,
            "refinement_delta": self.refinement_delta,
            "checks": dict(self.checks),
            "passed": self.passed,
        }
