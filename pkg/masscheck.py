#!/usr/bin/env python3
"""
masscheck 命令列 - Command line entry point

Usage:
    masscheck run <scenario-file> [--out DIR] [--jobs N] [--tolerance-profile strict|default]
    masscheck presets

Exit codes: 0 all verdicts PASS, 1 any FAIL, 2 usage/parse/IO error,
3 HYPOTHESIS-VIOLATED or INCONCLUSIVE present.
"""

import argparse
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import List, Optional

from checks import CheckStatus, worst_status
from config import TOLERANCE_PROFILES, Settings
from errors import MassCheckError, ReportError, ScenarioError
from pipelines import run_scenario
from profiles import PRESET_CATALOGUE
from report import emit_report, render_summary
from scenario import load_scenario

logger = logging.getLogger("masscheck")

EXIT_PASS, EXIT_FAIL, EXIT_USAGE, EXIT_UNDECIDED = 0, 1, 2, 3


def exit_code(statuses: List[CheckStatus]) -> int:
    worst = worst_status(statuses)
    if worst is CheckStatus.FAIL:
        return EXIT_FAIL
    if worst in (CheckStatus.HYPOTHESIS_VIOLATED, CheckStatus.INCONCLUSIVE):
        return EXIT_UNDECIDED
    return EXIT_PASS


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="masscheck",
                                     description="質量與填充檢查 - quasi-local mass and NNSC fill-in checks")
    subparsers = parser.add_subparsers(dest="command", help="可用命令")

    run_parser = subparsers.add_parser("run", help="執行情境檔 (run scenario files)")
    run_parser.add_argument("scenarios", nargs="+", help="scenario file(s)")
    run_parser.add_argument("--out", help="output directory (default: MASSCHECK_OUT or masscheck_out)")
    run_parser.add_argument("--jobs", type=int, help="parallel workers for delta sweeps")
    run_parser.add_argument("--tolerance-profile", choices=sorted(TOLERANCE_PROFILES),
                            help="tolerance table to start from")

    subparsers.add_parser("presets", help="列出解析剖面 (list analytic profiles)")
    return parser


def list_presets():
    print("📚 analytic profiles:")
    for name in sorted(PRESET_CATALOGUE):
        print(f"   {name:<14} {PRESET_CATALOGUE[name]}")


def run_command(args: argparse.Namespace, settings: Settings) -> int:
    if args.jobs is not None and args.jobs < 1:
        print("❌ --jobs must be at least 1", file=sys.stderr)
        return EXIT_USAGE
    settings = replace(
        settings,
        jobs=args.jobs if args.jobs is not None else settings.jobs,
        out_dir=args.out if args.out is not None else settings.out_dir,
        tolerance_profile=args.tolerance_profile or settings.tolerance_profile,
    )
    if settings.tolerance_profile not in TOLERANCE_PROFILES:
        print(f"❌ unknown tolerance profile '{settings.tolerance_profile}'", file=sys.stderr)
        return EXIT_USAGE

    statuses: List[CheckStatus] = []
    for path in args.scenarios:
        logger.info(f"🚀 running {path}")
        try:
            scenario = load_scenario(path)
            report = run_scenario(scenario, settings)
            out_dir = scenario.get("output", "dir") or Path(settings.out_dir)
            prefix = scenario.get("output", "prefix")
            if prefix:
                report.scenario = prefix
            emit_report(report, out_dir)
        except (ScenarioError, ReportError) as e:
            print(f"❌ {e}", file=sys.stderr)
            return EXIT_USAGE
        except MassCheckError as e:
            print(f"❌ {path}: {e}", file=sys.stderr)
            return EXIT_USAGE
        print(render_summary(report))
        statuses.append(report.verdict)
    return exit_code(statuses)


def main(argv: Optional[List[str]] = None) -> int:
    settings = Settings.from_env()
    logging.basicConfig(
        level=getattr(logging, settings.log_level, logging.INFO),
        format='%(asctime)s - %(levelname)s - %(message)s'
    )
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_PASS

    if not args.command:
        parser.print_help()
        return EXIT_USAGE
    if args.command == "presets":
        list_presets()
        return EXIT_PASS
    return run_command(args, settings)


if __name__ == "__main__":
    sys.exit(main())
