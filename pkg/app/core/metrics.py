# app/core/metrics.py
"""
Metric registry: maps a MetricSpec onto the analytical evaluators and returns
one MetricValue per output (grid point or component).
"""

import math
from typing import Callable, Dict, List

from scipy import stats

from app.core import analysis
from app.schemas.estimate_schema import MetricSpec, MetricValue
from app.schemas.scenario_schema import ScenarioConfig


def zenith_law(spec: MetricSpec):
    return stats.uniform(loc=0.0, scale=spec.zenith_max_rad)


def _single(label: str, result) -> List[MetricValue]:
    if isinstance(result, analysis.Evaluation):
        return [MetricValue(label=label, value=result.value, error=result.error)]
    return [MetricValue(label=label, value=float(result))]


def _over_grid(spec: MetricSpec, func: Callable) -> List[MetricValue]:
    rows = []
    for point in spec.grid:
        result = func(point)
        value, error = (result.value, result.error) if isinstance(result, analysis.Evaluation) else (result, 0.0)
        rows.append(
            MetricValue(label=spec.metric_id, param_name=spec.grid_parameter, param=point, value=value, error=error)
        )
    return rows


def _gain_factors(cfg: ScenarioConfig, spec: MetricSpec) -> List[MetricValue]:
    factors = analysis.gain_factors(cfg)
    return [
        MetricValue(label="gain-factors:orbit", value=factors.orbit_factor),
        MetricValue(label="gain-factors:satellite", value=factors.satellite_factor),
        MetricValue(label="gain-factors:orbit-linearized", value=factors.orbit_factor_linearized),
    ]


def _throughput(cfg: ScenarioConfig, spec: MetricSpec) -> List[MetricValue]:
    result = analysis.throughput(cfg)
    return [
        MetricValue(label="throughput:platform", value=result.rate_platform_bps_hz),
        MetricValue(label="throughput:ground", value=result.rate_ground_bps_hz),
        MetricValue(label="throughput:end-to-end", value=result.end_to_end_bps_hz),
    ]


def _propagation_delay(cfg: ScenarioConfig, spec: MetricSpec) -> List[MetricValue]:
    summary = analysis.propagation_delay_stats(cfg)
    return [
        MetricValue(label=f"propagation-delay:{name}", value=getattr(summary, f"{name}_s"))
        for name in ("mean", "min", "median", "p90", "max")
    ]


_EVALUATORS: Dict[str, Callable[[ScenarioConfig, MetricSpec], List[MetricValue]]] = {
    "effective-orbits": lambda cfg, spec: _single(spec.metric_id, analysis.avg_effective_orbits(cfg)),
    "effective-satellites": lambda cfg, spec: _single(
        spec.metric_id, analysis.avg_effective_satellites(cfg, with_error=True)
    ),
    "gain-factors": _gain_factors,
    "connectivity": lambda cfg, spec: _single(spec.metric_id, analysis.connectivity(cfg, with_error=True)),
    "connectivity-gain": lambda cfg, spec: _single(spec.metric_id, analysis.connectivity_gain(cfg)),
    "range-ccdf": lambda cfg, spec: _over_grid(
        spec, lambda d: analysis.nearest_distance_ccdf(cfg, d, with_error=True)
    ),
    "snr-coverage": lambda cfg, spec: _over_grid(
        spec, lambda tau: analysis.snr_coverage_platform(cfg, tau, with_error=True)
    ),
    "snr-coverage-ground": lambda cfg, spec: _over_grid(spec, lambda tau: analysis.snr_coverage_ground(cfg, tau)),
    "rate-platform": lambda cfg, spec: _single(spec.metric_id, analysis.rate_platform(cfg, with_error=True)),
    "rate-ground": lambda cfg, spec: _single(spec.metric_id, analysis.rate_ground(cfg, with_error=True)),
    "throughput": _throughput,
    "delay-ccdf": lambda cfg, spec: _over_grid(spec, lambda t: analysis.delay_ccdf(cfg, t, with_error=True)),
    "delay-floor": lambda cfg, spec: _single(spec.metric_id, analysis.delay_ccdf_asymptotic(cfg)),
    "propagation-delay": _propagation_delay,
    "connectivity-zenith": lambda cfg, spec: _single(
        spec.metric_id, analysis.connectivity_random_zenith(cfg, zenith_law(spec), with_error=True)
    ),
    "connectivity-elevation": lambda cfg, spec: _single(
        spec.metric_id,
        analysis.connectivity_min_elevation(
            cfg.updated(platform_enabled=False), spec.kappa_rad, with_error=True
        ),
    ),
}


def evaluate(cfg: ScenarioConfig, spec: MetricSpec) -> List[MetricValue]:
    """Analytical value(s) of a metric; connectivity-elevation always drops the platform."""
    rows = _EVALUATORS[spec.metric_id](cfg, spec)
    return [row for row in rows if not (row.label == "throughput:ground" and math.isinf(row.value))]
