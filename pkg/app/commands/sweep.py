# app/commands/sweep.py
import argparse
import logging

import pandas as pd

from app.commands.common import (
    MC_COLUMNS,
    ROW_COLUMNS,
    add_metric_args,
    add_scenario_args,
    env_workers,
    metric_rows,
    metric_spec,
    scenario_points,
)
from app.core import montecarlo
from app.utils.helpers import write_csv

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser(
        "sweep",
        help="evaluate a metric over a Cartesian grid of parameters",
        description=(
            "Columns: " + ", ".join(ROW_COLUMNS) + "; with --with-mc also " + ", ".join(MC_COLUMNS) + ". "
            "--lambda, --mu and --h-a take start:stop:step or a,b,c."
        ),
    )
    add_scenario_args(parser, sweepable=True)
    add_metric_args(parser)
    parser.add_argument("--with-mc", type=int, metavar="N", help="append Monte Carlo estimates from N trials")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", help="write CSV here instead of stdout")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    points = scenario_points(args, sweepable=True)
    spec = metric_spec(args)
    workers = env_workers()
    rows = []
    for index, cfg in enumerate(points):
        estimates = None
        if args.with_mc:
            estimates = montecarlo.estimate(cfg, spec, args.with_mc, args.seed, workers=workers)
        rows += metric_rows(cfg, spec, estimates)
        logger.debug("sweep point %d/%d done", index + 1, len(points))

    columns = ROW_COLUMNS + (MC_COLUMNS if args.with_mc else [])
    write_csv(pd.DataFrame(rows, columns=columns), args.out)
    logger.info("swept %s over %d point(s)", spec.metric_id, len(points))
    return 0
