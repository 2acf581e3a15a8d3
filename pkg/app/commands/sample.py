# app/commands/sample.py
import argparse
import logging

import numpy as np

from app.core import coxnet
from app.commands.common import add_scenario_args, scenario_points
from app.utils.helpers import write_csv

logger = logging.getLogger(__name__)


def register(subparsers) -> None:
    parser = subparsers.add_parser(
        "sample",
        help="draw one constellation snapshot",
        description=(
            "Columns: orbit_id, theta_rad, phi_rad, omega_rad, x_km, y_km, z_km, "
            "epoch_s, ground_node_count. One row per satellite."
        ),
    )
    add_scenario_args(parser)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--epoch", type=float, default=0.0, help="propagate the snapshot by this many seconds")
    parser.add_argument("--out", help="write CSV here instead of stdout")
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    (cfg,) = scenario_points(args)
    rng = np.random.default_rng(np.random.SeedSequence(args.seed))
    sample = coxnet.sample_constellation(cfg.densities, rng)
    if args.epoch:
        sample = coxnet.propagate(sample, cfg.geom, args.epoch)
    frame = coxnet.snapshot_frame(sample, cfg.geom, cfg.ground_node_count)
    write_csv(frame, args.out)
    logger.info("sampled %d orbits, %d satellites (seed %d)", sample.n_orbits, sample.n_satellites, args.seed)
    return 0
