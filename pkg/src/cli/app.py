"""
Command-line entry point.

    wavelab <subcommand> --config <path> [--out <dir>] [--threads N] [--deterministic]
"""

import argparse
import dataclasses
import sys

from cli.core import EXIT_CONFIG_ERROR, dispatch, load_config, parse_config, validate_config
from cli.types import COMMANDS
from common.errors import ConfigError
from common.logging_config import get_logger

logger = get_logger("cli")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="wavelab", description="Radial quasilinear wave laboratory.")
    ap.add_argument("subcommand", choices=COMMANDS, help="Experiment to run.")
    ap.add_argument("--config", type=str, default=None, help="JSON run configuration (defaults if omitted).")
    ap.add_argument("--out", type=str, default=None, help="Output directory (overrides out_dir).")
    ap.add_argument("--threads", type=int, default=None, help="Sweep workers (overrides threads).")
    ap.add_argument(
        "--deterministic",
        action="store_true",
        help="Serial execution; identical config and seed give bitwise-identical outputs.",
    )
    return ap


def main(argv: list[str] | None = None) -> int:
    """Parse arguments, load the config (the subcommand replaces its command key) and dispatch."""
    args = build_parser().parse_args(argv)

    try:
        cfg = load_config(args.config) if args.config else parse_config("{}")
        threads = cfg.threads if args.threads is None else args.threads
        if args.deterministic:
            threads = 1
        cfg = validate_config(dataclasses.replace(cfg, command=args.subcommand, threads=threads))
    except ConfigError as e:
        logger.error(f"Config error ({e.key}): {e}")
        return EXIT_CONFIG_ERROR

    return dispatch(cfg, args.out)


if __name__ == "__main__":
    sys.exit(main())
