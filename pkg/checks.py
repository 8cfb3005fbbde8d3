#!/usr/bin/env python3
"""
檢查結果 - Check records shared by every pipeline

Features:
1. CheckStatus with the report icons (PASS / FAIL / WARNING / INFO,
   plus HYPOTHESIS-VIOLATED and INCONCLUSIVE for theorem verdicts)
2. CheckResult: one named comparison against a recorded tolerance
3. Verdict aggregation with the precedence used for exit codes
"""

from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, Iterable, List, Optional


class CheckStatus(Enum):
    PASS = "PASS"
    FAIL = "FAIL"
    WARNING = "WARNING"
    INFO = "INFO"
    HYPOTHESIS_VIOLATED = "HYPOTHESIS-VIOLATED"
    INCONCLUSIVE = "INCONCLUSIVE"

    @property
    def icon(self) -> str:
        return {
            CheckStatus.PASS: "✅",
            CheckStatus.FAIL: "❌",
            CheckStatus.WARNING: "⚠️",
            CheckStatus.INFO: "ℹ️",
            CheckStatus.HYPOTHESIS_VIOLATED: "🚫",
            CheckStatus.INCONCLUSIVE: "❔",
        }[self]


@dataclass
class CheckResult:
    subject: str
    test_name: str
    status: CheckStatus
    message: str
    details: Optional[Dict[str, Any]] = field(default=None)

    @property
    def passed(self) -> bool:
        return self.status in (CheckStatus.PASS, CheckStatus.INFO)


def check(subject: str, test_name: str, ok: bool, message: str,
          **details: Any) -> CheckResult:
    """PASS/FAIL record for a boolean outcome."""
    status = CheckStatus.PASS if ok else CheckStatus.FAIL
    return CheckResult(subject, test_name, status, message, details or None)


def info(subject: str, test_name: str, message: str, **details: Any) -> CheckResult:
    return CheckResult(subject, test_name, CheckStatus.INFO, message, details or None)


def worst_status(statuses: Iterable[CheckStatus]) -> CheckStatus:
    """FAIL > HYPOTHESIS-VIOLATED > INCONCLUSIVE > WARNING > PASS."""
    order: List[CheckStatus] = [CheckStatus.FAIL, CheckStatus.HYPOTHESIS_VIOLATED,
                                CheckStatus.INCONCLUSIVE, CheckStatus.WARNING]
    seen = set(statuses)
    for status in order:
        if status in seen:
            return status
    return CheckStatus.PASS


def all_passed(results: Iterable[CheckResult]) -> bool:
    return all(r.passed for r in results)
