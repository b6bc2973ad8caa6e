"""Command-line front end.

Exit status: 0 success, 1 validation errors, 2 malformed input, 3 I/O error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass, field, replace
from pathlib import Path

from .campaign import (
    ResponseSet,
    default_config_path,
    evaluate_responses,
    load_campaign_config,
    parse_responses,
    results_filename,
    validate_campaign,
    write_results,
)
from .demo import run_demo
from .errors import E_IO, E_SCHEMA, AppraisalError
from .fuzzy import NormalizationMode
from .report import FORMATS, TEXT, group_counts, render_report

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_INPUT = 2
EXIT_IO = 3


@dataclass
class RunOptions:
    config: Path | None = None
    responses: Path | None = None
    out: Path | None = None
    format: str = TEXT
    strict: bool = False
    subjects: list[str] = field(default_factory=list)


def _exit_code(exc: AppraisalError) -> int:
    return EXIT_IO if exc.code == E_IO else EXIT_INPUT


def _load(options: RunOptions):
    config = load_campaign_config(options.config or default_config_path())
    if options.responses is None:
        raise AppraisalError(E_SCHEMA, "--responses is required")
    responses = parse_responses(options.responses, config)
    if options.subjects:
        wanted = set(options.subjects)
        responses = replace(
            responses, responses=tuple(r for r in responses.responses if r.subject_id in wanted)
        )
    return config, responses


def _validation_failed(report, options: RunOptions) -> bool:
    return bool(report.errors) or (options.strict and bool(report.warnings))


def _print_report(report, responses: ResponseSet, out) -> None:
    for f in report.errors:
        print(f"error   {f}", file=out)
    for f in report.warnings:
        print(f"warning {f}", file=out)
    covered: dict[str, list[int]] = {}
    for (subject, _aspect, _factor, _role), n in report.coverage.items():
        covered.setdefault(subject, []).append(n)
    for subject in responses.subjects:
        print(f"subject {subject}: {sum(covered.get(subject, []))} responses", file=out)
    print(f"{len(report.errors)} error(s), {len(report.warnings)} warning(s)", file=out)


def cmd_validate(options: RunOptions, out=None) -> int:
    out = out or sys.stdout
    try:
        config, responses = _load(options)
    except AppraisalError as exc:
        print(f"error   {exc}", file=out)
        return _exit_code(exc)
    mode = NormalizationMode.STRICT if options.strict else None
    report = validate_campaign(config, responses, mode)
    _print_report(report, responses, out)
    return EXIT_INVALID if _validation_failed(report, options) else EXIT_OK


def cmd_evaluate(options: RunOptions, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    try:
        config, responses = _load(options)
    except AppraisalError as exc:
        print(f"error   {exc}", file=out)
        return _exit_code(exc)
    mode = NormalizationMode.STRICT if options.strict else None
    report = validate_campaign(config, responses, mode)
    if _validation_failed(report, options):
        _print_report(report, responses, out)
        return EXIT_INVALID

    results = evaluate_responses(config, responses)
    target = options.out or Path.cwd()
    if target.is_dir():
        target = target / results_filename(config.campaign_id)
    try:
        write_results(results, target)
    except AppraisalError as exc:
        print(f"error   {exc}", file=out)
        return EXIT_IO
    # the results path carries a timestamp, so it goes to stderr to keep stdout reproducible
    print(f"results written to {target}", file=err)

    for r in results:
        print(render_report(r, options.format), file=out)
        if options.format == TEXT:
            print(file=out)
    notice = f"{len(results)} subject{'' if len(results) == 1 else 's'} evaluated"
    if options.format == TEXT:
        print(notice, file=out)
        for group, performer, n in group_counts(results, config.bands):
            print(f"  {group} ({performer}): {n}", file=out)
    else:
        print(notice, file=err)
    return EXIT_OK


def cmd_demo_paper(out=None) -> int:
    out = out or sys.stdout
    failures = run_demo(lambda line: print(line, file=out))
    return EXIT_INVALID if failures else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="appraisal360",
        description="Fuzzy multi-source performance appraisal.",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    def campaign_args(p):
        p.add_argument(
            "--config",
            type=Path,
            help="campaign config (YAML); defaults to $APPRAISAL360_DEFAULT_CONFIG or the built-in config",
        )
        p.add_argument("--responses", type=Path, required=True, help="response file (CSV, JSON or JSONL)")
        p.add_argument("--strict", action="store_true", help="strict normalization; warnings fail the run")
        p.add_argument(
            "--subject", action="append", default=[], dest="subjects", help="only this subject (repeatable)"
        )

    p_val = sub.add_parser("validate", help="check a response file against a campaign")
    campaign_args(p_val)

    p_eval = sub.add_parser("evaluate", help="appraise every subject and write a results file")
    campaign_args(p_eval)
    p_eval.add_argument("--out", type=Path, help="results file or directory (default: current directory)")
    p_eval.add_argument("--format", choices=FORMATS, default=TEXT, help="summary format on stdout")

    sub.add_parser("demo-paper", help="replay the worked examples and check them")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    if args.command == "demo-paper":
        return cmd_demo_paper()
    options = RunOptions(
        config=args.config,
        responses=args.responses,
        out=getattr(args, "out", None),
        format=getattr(args, "format", TEXT),
        strict=args.strict,
        subjects=args.subjects,
    )
    if args.command == "validate":
        return cmd_validate(options)
    return cmd_evaluate(options)


if __name__ == "__main__":
    sys.exit(main())
