# app/commands/common.py
"""Flags and row builders shared by the eval, sweep and validate commands."""

import argparse
import itertools
import math
import os
from typing import Dict, List, Optional, Sequence, get_args

from pydantic import ValidationError

from app.core import metrics
from app.schemas.estimate_schema import GRID_PARAMETERS, MetricEstimate, MetricId, MetricSpec
from app.schemas.scenario_file import load_scenario
from app.schemas.scenario_schema import ScenarioConfig
from app.utils.errors import MetricSpecError, ScenarioError
from app.utils.helpers import db_to_linear, linear_to_db, parse_grid

METRIC_IDS = sorted(get_args(MetricId))

ROW_COLUMNS = ["metric", "lambda", "mu", "h_a_km", "platform", "param_name", "param_value", "value", "error"]
MC_COLUMNS = ["mc_mean", "mc_stderr", "mc_trials"]


def env_workers() -> int:
    raw = os.getenv("COXSAT_WORKERS", "1")
    try:
        return max(1, int(raw))
    except ValueError as exc:
        raise ScenarioError(f"COXSAT_WORKERS must be an integer, got {raw!r}") from exc


def add_scenario_args(parser: argparse.ArgumentParser, sweepable: bool = False) -> None:
    kind = "value or start:stop:step / a,b,c" if sweepable else "value"
    parser.add_argument("--scenario", help="scenario file (KEY=VALUE); reference values when omitted")
    parser.add_argument("--lambda", dest="lam", help=f"mean number of orbits ({kind})")
    parser.add_argument("--mu", help=f"mean satellites per orbit ({kind})")
    parser.add_argument("--h-a", dest="h_a", help=f"platform altitude in km ({kind})")
    parser.add_argument("--platform", choices=["on", "off"], help="override platform_enabled")


def add_metric_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--metric", required=True, choices=METRIC_IDS)
    parser.add_argument(
        "--tau-db",
        help="SNR thresholds in dB (snr-coverage, snr-coverage-ground); write a range starting below 0 "
        "as --tau-db=-5:30:2.5 so it is not read as an option",
    )
    parser.add_argument("--d", help="distances in km (range-ccdf)")
    parser.add_argument("--t", help="times in s (delay-ccdf)")
    parser.add_argument("--kappa-deg", type=float, default=0.0, help="minimum elevation (connectivity-elevation)")
    parser.add_argument("--zenith-max-deg", type=float, default=30.0, help="uniform zenith law upper end (connectivity-zenith)")


def _values(raw: Optional[str], field: str, sweepable: bool) -> List[Optional[float]]:
    if raw is None:
        return [None]
    values = parse_grid(raw, field)
    if not values:
        raise ScenarioError(f"--{field} is empty")
    if len(values) > 1 and not sweepable:
        raise ScenarioError(f"--{field} takes a single value here; use the sweep command for ranges")
    return values


def scenario_points(args: argparse.Namespace, sweepable: bool = False) -> List[ScenarioConfig]:
    """Base scenario with the CLI overrides applied (Cartesian product when sweeping)."""
    base = load_scenario(args.scenario)
    platform = None if args.platform is None else args.platform == "on"
    points = []
    for lam, mu, h_a in itertools.product(
        _values(args.lam, "lambda", sweepable),
        _values(args.mu, "mu", sweepable),
        _values(args.h_a, "h-a", sweepable),
    ):
        try:
            points.append(
                base.updated(mean_orbits=lam, mean_sats_per_orbit=mu, platform_altitude_km=h_a, platform_enabled=platform)
            )
        except ValidationError as exc:
            raise ScenarioError(f"invalid override: {exc.errors()[0]['msg']}") from exc
    return points


def metric_spec(args: argparse.Namespace) -> MetricSpec:
    metric = args.metric
    grid: Sequence[float] = ()
    parameter = GRID_PARAMETERS.get(metric)
    if parameter == "tau":
        if args.tau_db is None:
            raise MetricSpecError(f"{metric} needs --tau-db")
        grid = [db_to_linear(v) for v in parse_grid(args.tau_db, "tau-db")]
    elif parameter == "d_km":
        if args.d is None:
            raise MetricSpecError(f"{metric} needs --d")
        grid = parse_grid(args.d, "d")
    elif parameter == "t_s":
        if args.t is None:
            raise MetricSpecError(f"{metric} needs --t")
        grid = parse_grid(args.t, "t")
    try:
        return MetricSpec(
            metric_id=metric,
            grid=tuple(grid),
            kappa_rad=math.radians(args.kappa_deg),
            zenith_max_rad=math.radians(args.zenith_max_deg),
        )
    except ValidationError as exc:
        raise MetricSpecError(f"invalid metric parameters: {exc.errors()[0]['msg']}") from exc


def _display_param(name: Optional[str], value: Optional[float]):
    if name is None:
        return "", ""
    if name == "tau":
        return "tau_db", linear_to_db(value) if value > 0 else -math.inf
    return name, value


def metric_rows(
    cfg: ScenarioConfig,
    spec: MetricSpec,
    estimates: Optional[List[MetricEstimate]] = None,
) -> List[Dict[str, object]]:
    """One CSV row per analytical output, optionally joined with its MC estimate."""
    by_key = {(e.metric_id, e.param): e for e in estimates or []}
    rows = []
    for value in metrics.evaluate(cfg, spec):
        name, shown = _display_param(value.param_name, value.param)
        row = {
            "metric": value.label,
            "lambda": cfg.densities.mean_orbits,
            "mu": cfg.densities.mean_sats_per_orbit,
            "h_a_km": cfg.geom.platform_altitude_km,
            "platform": "on" if cfg.platform_enabled else "off",
            "param_name": name,
            "param_value": shown,
            "value": value.value,
            "error": value.error,
        }
        if estimates is not None:
            est = by_key.get((value.label, value.param))
            row.update(
                {
                    "mc_mean": est.mean if est else "",
                    "mc_stderr": est.stderr if est else "",
                    "mc_trials": est.n_trials if est else "",
                }
            )
        rows.append(row)
    return rows
