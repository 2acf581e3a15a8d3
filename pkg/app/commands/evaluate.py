# app/commands/evaluate.py
import argparse
import logging

import pandas as pd

from app.commands.common import ROW_COLUMNS, add_metric_args, add_scenario_args, metric_rows, metric_spec, scenario_points
from app.utils.helpers import write_csv

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser(
        "eval",
        help="evaluate one analytical metric",
        description="Columns: " + ", ".join(ROW_COLUMNS) + ". One row per grid point or metric component.",
    )
    add_scenario_args(parser)
    add_metric_args(parser)
    parser.add_argument("--out", help="write CSV here instead of stdout")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    (cfg,) = scenario_points(args)
    spec = metric_spec(args)
    frame = pd.DataFrame(metric_rows(cfg, spec), columns=ROW_COLUMNS)
    write_csv(frame, args.out)
    logger.info("evaluated %s: %d row(s)", spec.metric_id, len(frame))
    return 0
