"""Command-line entry point.

    coexmin solve|continuation|sweep|check --config <path> [--output <dir>] [--workers N]

The subcommand overrides the config file's run.mode.  Log verbosity comes
from the COEXMIN_LOG environment variable (debug, info, warning, error).
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

from .config import MODES, ConfigError, parse_config
from .pipeline import EXIT_IO, run


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="coexmin", description=__doc__)
    sub = parser.add_subparsers(dest="mode", required=True)
    for mode in MODES:
        p = sub.add_parser(mode, help=f"run in {mode} mode")
        p.add_argument("--config", required=True, help="path to the TOML run configuration")
        p.add_argument("--output", default=None, help="output directory (overrides config)")
        p.add_argument("--workers", type=int, default=None,
                       help="concurrent sweep stages (overrides config)")
    args = parser.parse_args(argv)

    level = os.environ.get("COEXMIN_LOG", "info").upper()
    logging.basicConfig(level=getattr(logging, level, logging.INFO),
                        format="%(levelname)s %(name)s: %(message)s")
    log = logging.getLogger("coexmin.cli")

    try:
        with open(args.config, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        log.error("cannot read config: %s", exc)
        return EXIT_IO

    try:
        config = parse_config(text)
    except ConfigError as exc:
        log.error("bad config: %s", exc)
        return EXIT_IO

    config.mode = args.mode
    if args.workers is not None:
        config.workers = args.workers
    if config.mode == "sweep" and not config.sweep:
        log.error("bad config: [invariant] mode=sweep needs a run.sweep list")
        return EXIT_IO

    outcome = run(config, output_dir=args.output)
    if outcome.hard_failures:
        log.error("failed: %s", outcome.hard_failures[0])
    elif outcome.report_path:
        log.info("report written to %s", outcome.report_path)
    return outcome.exit_code


if __name__ == "__main__":
    sys.exit(main())
