# app/main.py
"""
coxsat command line: python -m app.main {sample,eval,sweep,validate} ...

CSV goes to stdout (or --out); logs and the validation summary go to stderr.
Exit status: 0 ok, 1 validation flags raised, 2 invalid input or numerical failure.
"""

import argparse
import logging
import os
import sys
from typing import List, Optional

from dotenv import load_dotenv

from app.commands import evaluate, sample, sweep, validate
from app.utils.errors import CoxSatError

logger = logging.getLogger("app")

COMMANDS = (sample, evaluate, sweep, validate)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="coxsat",
        description="Cox satellite network metrics: analytical evaluation, sweeps and Monte Carlo validation.",
    )
    parser.add_argument(
        "--log-level",
        default=None,
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        help="defaults to $COXSAT_LOG_LEVEL or WARNING",
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    # every command module registers itself
    for command in COMMANDS:
        command.register(subparsers)
    return parser


def configure_logging(level: Optional[str]) -> None:
    level = (level or os.getenv("COXSAT_LOG_LEVEL", "WARNING")).upper()
    logging.basicConfig(
        level=getattr(logging, level, logging.WARNING),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    logging.captureWarnings(True)


def main(argv: Optional[List[str]] = None) -> int:
    load_dotenv()
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.log_level)

    logger.info("coxsat %s started", args.command)
    try:
        status = args.handler(args)
    except CoxSatError as exc:
        print(f"coxsat {args.command}: {exc}", file=sys.stderr)
        return 2
    logger.info("coxsat %s finished with status %d", args.command, status)
    return status


if __name__ == "__main__":
    raise SystemExit(main())
