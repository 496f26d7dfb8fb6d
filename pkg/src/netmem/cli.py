"""Command-line entry point: one subcommand per pipeline stage plus run-all.

Exit code 0 on success; on failure a machine-readable JSON error summary is
printed to stderr and the exit code is nonzero.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

from .config import ConfigError, apply_cli_overrides, load_config
from .pipeline import Pipeline, PipelineError, STAGE_ORDER


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="netmem",
        description=(
            "Audit how well completion models reproduce co-authorship "
            "networks against bibliographic baselines."
        ),
    )
    parser.add_argument("-v", "--verbose", action="store_true",
                        help="log stage progress to stderr")
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name in (*STAGE_ORDER, "run-all"):
        sub = subparsers.add_parser(name, help=f"run the {name} stage")
        sub.add_argument("--config", required=True, help="path to the run config JSON")
        sub.add_argument("--epsilon", default=None,
                         help="comma-separated thresholds (default 0.6,0.7,0.8,0.9)")
        sub.add_argument("--baseline", default=None,
                         choices=["openalex", "google-scholar", "both"])
        sub.add_argument("--mock-endpoint", default=None,
                         help="response fixture replacing all configured endpoints")
        sub.add_argument("--cache-dir", default=None)
        sub.add_argument("--out-dir", default=None)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        config = load_config(args.config)
        config = apply_cli_overrides(
            config,
            epsilons=args.epsilon,
            baseline=args.baseline,
            mock_endpoint=args.mock_endpoint,
            cache_dir=args.cache_dir,
            out_dir=args.out_dir,
        )
        pipeline = Pipeline(config)
        if args.command == "run-all":
            results = pipeline.run_all()
        else:
            results = [pipeline.run_stage(args.command)]
    except (ConfigError, PipelineError, OSError) as exc:
        summary = {
            "error": type(exc).__name__,
            "message": str(exc),
            "stage": getattr(exc, "stage", ""),
        }
        print(json.dumps(summary, sort_keys=True), file=sys.stderr)
        return 1
    for result in results:
        status = "skipped (unchanged)" if result.skipped else "completed"
        print(f"{result.name}: {status} "
              f"{json.dumps(result.counts, sort_keys=True)}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
