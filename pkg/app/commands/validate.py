# app/commands/validate.py
import argparse
import logging
import sys

from app.core import montecarlo, standards
from app.commands.common import env_workers
from app.schemas.scenario_file import load_scenario
from app.utils.helpers import write_csv

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser(
        "validate",
        help="compare analytical metrics with Monte Carlo estimates",
        description=(
            "Columns: metric_id, param_point, analytical, mc_mean, mc_stderr, z_score. "
            "Exit status 1 when any z-score exceeds 3."
        ),
    )
    parser.add_argument("--scenario", help="base scenario file; the grid overrides lambda, mu and h_a")
    parser.add_argument("--trials", type=int, default=100_000)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--grid", choices=["default", "trivial"], default="default")
    parser.add_argument("--corrupt", action="store_true", help="shift the analytical connectivity to test the detector")
    parser.add_argument("--track", action="store_true", help="log the run to MLflow")
    parser.add_argument("--out", help="write the report CSV here instead of stdout")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    base = load_scenario(args.scenario)
    grid = standards.validation_grid(base, args.grid)
    report = montecarlo.validate(
        grid,
        args.trials,
        args.seed,
        workers=env_workers(),
        corrupt_metric="connectivity" if args.corrupt else None,
    )
    write_csv(report.to_frame(), args.out)
    print(report.summary(), file=sys.stderr)

    if args.track:
        from app.ml.run_tracker import track_validation

        track_validation(report, base, args.grid, args.trials, args.seed)

    return 1 if report.flagged else 0
