"""
Command Line Front End
======================
    runProbeSpec.py run <file> [--query NAME]... [--format json|text] [--tolerance X]
                               [--jobs N] [--save-csv PATH] [--log-dir DIR] [--transcript PATH]
    runProbeSpec.py check <file>

Exit codes: 0 success, 1 some query failed (or an unknown --query),
2 parse failure, missing file or usage error.
"""

import argparse
from pathlib import Path
from typing import Optional, Sequence

from probe_helpers.engineLevers import DEFAULT_JOBS, DEFAULT_OUTPUT_FORMAT, MEMBERSHIP_TOL
from probe_helpers.text_blocks.cliTextBlocks import (
    checkCommandHelp,
    checkPassedText,
    cliDescription,
    diagnosticLineText,
    formatFlagHelp,
    jobsFlagHelp,
    logDirFlagHelp,
    missingFileText,
    queryFlagHelp,
    runCommandHelp,
    saveCsvFlagHelp,
    specFileHelp,
    toleranceFlagHelp,
    transcriptFlagHelp,
    unknownQueryText,
    unreadableFileText,
)
from utils.consoleLogger import ConsoleLogger
from utils.eventLogger import EvaluationEventLogger
from .evaluator import SpecEvaluator
from .parser import ParseOutcome, parse
from .results import format_json, format_text, save_csv

EXIT_OK = 0
EXIT_QUERY_ERROR = 1
EXIT_USAGE = 2


def build_arg_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="runProbeSpec.py", description=cliDescription)
    commands = ap.add_subparsers(dest="command", required=True)

    run = commands.add_parser("run", help=runCommandHelp, description=runCommandHelp)
    run.add_argument("spec_file", help=specFileHelp)
    run.add_argument("--query", action="append", default=None, metavar="NAME", help=queryFlagHelp)
    run.add_argument("--format", choices=("text", "json"), default=DEFAULT_OUTPUT_FORMAT, help=formatFlagHelp)
    run.add_argument("--tolerance", type=float, default=MEMBERSHIP_TOL, help=toleranceFlagHelp)
    run.add_argument("--jobs", type=int, default=DEFAULT_JOBS, help=jobsFlagHelp)
    run.add_argument("--save-csv", type=str, default=None, metavar="PATH", help=saveCsvFlagHelp)
    run.add_argument("--log-dir", type=str, default=None, metavar="DIR", help=logDirFlagHelp)
    run.add_argument("--transcript", type=str, default=None, metavar="PATH", help=transcriptFlagHelp)

    check = commands.add_parser("check", help=checkCommandHelp, description=checkCommandHelp)
    check.add_argument("spec_file", help=specFileHelp)
    check.add_argument("--transcript", type=str, default=None, metavar="PATH", help=transcriptFlagHelp)
    return ap


def _read_and_parse(path: Path, L: ConsoleLogger) -> Optional[ParseOutcome]:
    if not path.is_file():
        L.error(missingFileText.format(path=path))
        return None
    try:
        source = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        L.error(unreadableFileText.format(path=path, reason=exc))
        return None

    outcome = parse(source)
    for d in outcome.diagnostics:
        L.error(diagnosticLineText.format(path=path, line=d.line, column=d.column, severity=d.severity, message=d.message))
    return outcome


def _run(args, L: ConsoleLogger, usage: str) -> int:
    path = Path(args.spec_file)
    outcome = _read_and_parse(path, L)
    if outcome is None:
        L.error(usage.rstrip())
    if outcome is None or not outcome.ok:
        return EXIT_USAGE

    if args.command == "check":
        L.log(checkPassedText.format(path=path, count=len(outcome.ast.declarations)))
        return EXIT_OK

    declared = set(outcome.ast.query_names)
    unknown = [name for name in (args.query or []) if name not in declared]
    if unknown:
        for name in unknown:
            L.error(unknownQueryText.format(name=name))
        return EXIT_QUERY_ERROR

    event_logger = EvaluationEventLogger(args.log_dir, path.stem) if args.log_dir else None
    evaluator = SpecEvaluator(outcome.ast, tolerance=args.tolerance).build()
    for name, failure in evaluator.failures.items():
        L.error(f"{path}: warning: declaration '{name}' failed: {failure}")
    records = evaluator.run_queries(args.query, jobs=max(1, args.jobs), event_logger=event_logger)

    if args.format == "json":
        L.log(format_json(records))
    elif records:
        L.log(format_text(records))
    for record in records:
        for note in record.diagnostics:
            L.error(f"{record.name}: note: {note}")

    if args.save_csv:
        save_csv(records, args.save_csv)
    return EXIT_QUERY_ERROR if any(r.failed for r in records) else EXIT_OK


def cli_main(argv: Optional[Sequence[str]] = None) -> int:
    """
    Run the command line front end.

    Args:
        argv: Arguments without the program name (defaults to sys.argv[1:])

    Returns:
        Process exit code
    """
    ap = build_arg_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        # argparse already printed usage (error) or help (success)
        return EXIT_OK if exc.code in (0, None) else EXIT_USAGE

    L = ConsoleLogger()
    try:
        return _run(args, L, ap.format_usage())
    finally:
        if args.transcript:
            L.flush_to(Path(args.transcript))
