#!/usr/bin/env python3
"""
報告輸出 - Scenario reports: CSV tables and a text summary

Features:
1. ScenarioReport: per-pipeline tables, constituent checks, one verdict per theorem instance
2. emit_report: one CSV per table (header row, minimal quoting, fixed float format)
   plus a checks table and a text summary
3. Deterministic output: rows sorted before emission, no wall-clock timestamps
"""

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Union

import pandas as pd

from checks import CheckResult, CheckStatus, worst_status
from errors import ReportError

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.12g"


@dataclass
class ScenarioReport:
    scenario: str
    pipeline: str
    theorem: str
    tables: Dict[str, pd.DataFrame] = field(default_factory=dict)
    checks: List[CheckResult] = field(default_factory=list)
    summary: Dict[str, Any] = field(default_factory=dict)
    notes: List[str] = field(default_factory=list)

    @property
    def verdict(self) -> CheckStatus:
        """PASS only when every constituent check passed."""
        if not self.checks:
            return CheckStatus.INCONCLUSIVE
        return worst_status(c.status for c in self.checks)

    def add(self, result: CheckResult) -> CheckResult:
        self.checks.append(result)
        icon = result.status.icon
        log = logger.info if result.passed else logger.warning
        log(f"{icon} {result.test_name}: {result.message}")
        return result

    def checks_table(self) -> pd.DataFrame:
        rows = [{"subject": c.subject, "test_name": c.test_name, "status": c.status.value,
                 "message": c.message} for c in self.checks]
        return pd.DataFrame(rows, columns=["subject", "test_name", "status", "message"])


def sorted_table(table: pd.DataFrame) -> pd.DataFrame:
    """Rows ordered by delta descending when the table is a sweep."""
    if "delta" in table.columns and len(table):
        return table.sort_values("delta", ascending=False, kind="mergesort").reset_index(drop=True)
    return table.reset_index(drop=True)


def write_table(table: pd.DataFrame, path: Path) -> Path:
    try:
        sorted_table(table).to_csv(path, index=False, float_format=FLOAT_FORMAT,
                                   quoting=csv.QUOTE_MINIMAL, lineterminator="\n")
    except OSError as e:
        raise ReportError(f"cannot write table: {e.strerror or e}", path)
    return path


def _format_value(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.10g}"
    return str(value)


def render_summary(report: ScenarioReport) -> str:
    statuses = [c.status for c in report.checks]
    total = len(statuses)
    passed = sum(1 for c in report.checks if c.passed)
    failed = statuses.count(CheckStatus.FAIL)
    warnings = statuses.count(CheckStatus.WARNING)
    verdict = report.verdict

    lines = [
        "=" * 80,
        f"🔍 masscheck 檢查報告 - {report.theorem}",
        "=" * 80,
        f"情境 Scenario: {report.scenario}",
        f"管線 Pipeline: {report.pipeline}",
        "",
        "📈 整體統計:",
        f"   總檢查數: {total}",
        f"   ✅ 通過: {passed}",
        f"   ❌ 失敗: {failed}",
        f"   ⚠️ 警告: {warnings}",
        "",
    ]
    if report.summary:
        lines.append("📋 主要數值:")
        for key in sorted(report.summary):
            lines.append(f"   {key}: {_format_value(report.summary[key])}")
        lines.append("")

    lines.append("🧪 檢查詳情:")
    lines.append("-" * 80)
    for c in report.checks:
        lines.append(f"   {c.status.icon} {c.test_name}: {c.message}")
        if c.details and not c.passed:
            for key, value in c.details.items():
                lines.append(f"      {key}: {_format_value(value)}")

    if report.notes:
        lines.extend(["", "⚠️ 需要關注的問題:", "-" * 50])
        lines.extend(f"• {note}" for note in report.notes)

    lines.extend([
        "",
        f"{verdict.icon} 結論 Verdict: {verdict.value}",
        "",
        "=" * 80,
        "報告結束 - End of Report",
        "=" * 80,
    ])
    return "\n".join(lines) + "\n"


def emit_report(report: ScenarioReport, out_dir: Union[str, Path]) -> List[Path]:
    """Write `<scenario>_<table>.csv` per table, `<scenario>_checks.csv` and `<scenario>_summary.txt`."""
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise ReportError(f"cannot create output directory: {e.strerror or e}", out_dir)

    written: List[Path] = []
    for name in sorted(report.tables):
        written.append(write_table(report.tables[name], out_dir / f"{report.scenario}_{name}.csv"))
    written.append(write_table(report.checks_table(), out_dir / f"{report.scenario}_checks.csv"))

    summary_path = out_dir / f"{report.scenario}_summary.txt"
    try:
        summary_path.write_text(render_summary(report), encoding="utf-8")
    except OSError as e:
        raise ReportError(f"cannot write summary: {e.strerror or e}", summary_path)
    written.append(summary_path)
    logger.info(f"📄 report for {report.scenario} written to {out_dir}")
    return written
