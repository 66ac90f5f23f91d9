"""Command-line entry point.

Exit codes: 0 success, 1 usage, 2 data error, 3 gateway error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import pipeline
from .errors import GatewayError, PromptNerError
from .vocab import PromptStrategy

logger = logging.getLogger("promptner")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_GATEWAY = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _strategies(value: str) -> list[PromptStrategy]:
    try:
        return [PromptStrategy.from_name(v) for v in value.split(",") if v.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="promptner", description=__doc__.splitlines()[0])
    parser.add_argument("-c", "--config", type=Path, default=Path("promptner.yaml"), help="YAML config file")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ingest", help="parse the corpus and print sample counts")
    p.add_argument("--allow-errors", action="store_true", help="continue past malformed annotations")

    p = sub.add_parser("run", help="query the model for each prompt strategy")
    p.add_argument("--strategies", type=_strategies, default=list(PromptStrategy))
    p.add_argument("--mode", choices=["replay", "record", "live"])
    p.add_argument("--jobs", type=int, help="strategies to run concurrently")

    p = sub.add_parser("ensemble", help="cluster and vote over a run's few-shot outputs")
    p.add_argument("--run", required=True, dest="run_id")
    p.add_argument("--tau", type=float)
    p.add_argument("--strategies", type=_strategies)

    p = sub.add_parser("evaluate", help="score a run against the test document")
    p.add_argument("--run", required=True, dest="run_id")

    p = sub.add_parser("report", help="print an evaluation artifact")
    p.add_argument("--run", required=True, dest="run_id")
    p.add_argument("--format", choices=sorted(pipeline.REPORT_FILES), default="text")
    return parser


def dispatch(args, config: pipeline.PipelineConfig, transport=None) -> int:
    if args.command == "ingest":
        summary = pipeline.ingest(config, allow_errors=args.allow_errors)
        for err in summary.errors:
            print(f"warning: {err}", file=sys.stderr)
        print(summary.render())
        return EXIT_OK

    if args.command == "run":
        if args.mode:
            config.mode = args.mode
        if args.jobs:
            config.jobs = args.jobs
        result = pipeline.run(config, args.strategies, transport=transport)
        for name, row in result.manifest["results"].items():
            if row["status"] == "ok":
                trimmed = f", trimmed x{row['trims']}" if row["trims"] else ""
                print(f"{name}: {row['entities']} entities, {row['latency_seconds']:.2f}s{trimmed}")
            else:
                print(f"{name}: FAILED {row['error']}: {row['message']}", file=sys.stderr)
        print(f"run_id={result.run_id}")
        if result.failures:
            gateway = any(isinstance(e, GatewayError) for e in result.failures.values())
            return EXIT_GATEWAY if gateway else EXIT_DATA
        return EXIT_OK

    if args.command == "ensemble":
        result = pipeline.ensemble(config, args.run_id, tau=args.tau, strategies=args.strategies, transport=transport)
        print(result.summary())
        return EXIT_OK

    if args.command == "evaluate":
        pipeline.evaluate(config, args.run_id, transport=transport)
        print(pipeline.report(config, args.run_id, "text"), end="")
        return EXIT_OK

    if args.command == "report":
        print(pipeline.report(config, args.run_id, args.format), end="")
        return EXIT_OK
    return EXIT_USAGE


def main(argv=None, transport=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        config = pipeline.PipelineConfig.from_file(args.config)
    except FileNotFoundError:
        print(f"promptner: config file {args.config} not found", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"promptner: bad config: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PromptNerError as exc:
        print(f"promptner: {exc}", file=sys.stderr)
        return exc.exit_code
    try:
        return dispatch(args, config, transport)
    except pipeline.CorpusErrors as exc:
        for err in exc.errors:
            print(f"error: {err}", file=sys.stderr)
        print(f"promptner: {exc}", file=sys.stderr)
        return exc.exit_code
    except PromptNerError as exc:
        print(f"promptner: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except ValueError as exc:
        print(f"promptner: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
