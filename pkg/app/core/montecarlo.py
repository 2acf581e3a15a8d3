# app/core/montecarlo.py
"""
Monte Carlo estimators for every simulated metric, and the analytical-vs-simulation
validation run.

- trials are grouped in fixed-size blocks; block k draws from
  SeedSequence([master_seed, k]) split into independent substreams
- a block returns per-column sums; blocks are combined with math.fsum, so the
  result does not depend on how blocks were spread over worker processes
- all requested metrics share the constellation of a block
"""

import logging
import math
import warnings
from dataclasses import dataclass
from functools import cached_property
from multiprocessing import Pool
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from app.core import analysis, coxnet, geometry, metrics
from app.core.standards import validation_specs
from app.schemas.estimate_schema import MetricEstimate, MetricSpec, ValidationRow
from app.schemas.scenario_schema import ScenarioConfig
from app.utils.errors import MetricSpecError, SmallSampleWarning
from app.utils.helpers import SPEED_OF_LIGHT_KM_S

logger = logging.getLogger(__name__)

BLOCK_SIZE = 2048
MIN_TRIALS = 100
STDERR_WARN = 0.01
CORRUPTION_OFFSET = 0.05


# =========================
# RANDOM STREAMS
# =========================


@dataclass(frozen=True)
class BlockStreams:
    constellation: np.random.Generator
    sat_fading: np.random.Generator
    ground_fading: np.random.Generator
    zenith: np.random.Generator


def block_streams(master_seed: int, block_index: int) -> BlockStreams:
    """
    block
      ├── constellation (orbits, then satellites)
      ├── satellite-hop fading
      ├── ground-hop fading
      └── platform zenith angles
    """
    root = np.random.SeedSequence([master_seed, block_index])
    ss_constellation, ss_sat, ss_ground, ss_zenith = root.spawn(4)
    return BlockStreams(
        constellation=np.random.default_rng(ss_constellation),
        sat_fading=np.random.default_rng(ss_sat),
        ground_fading=np.random.default_rng(ss_ground),
        zenith=np.random.default_rng(ss_zenith),
    )


# =========================
# PER-BLOCK COLUMNS
# =========================


@dataclass(frozen=True)
class Column:
    values: np.ndarray  # (n_trials, n_params)
    indicator: bool = False
    mask: Optional[np.ndarray] = None  # trials that contribute (conditional metrics)


class _BlockContext:
    """Lazily computed per-trial quantities shared by the estimators of one block."""

    def __init__(self, cfg: ScenarioConfig, streams: BlockStreams, sample: coxnet.ConstellationSample):
        self.cfg = cfg
        self.streams = streams
        self.sample = sample
        self.n = sample.n_trials

    @cached_property
    def cap(self) -> float:
        return analysis.cap_half_angle(self.cfg)

    @cached_property
    def nearest(self) -> np.ndarray:
        return coxnet.nearest_distances(self.sample, self.cfg.geom, self.cfg.apex_radius_km, self.cap)

    @cached_property
    def snr_platform(self) -> np.ndarray:
        fading = np.asarray(self.cfg.fading.sample(self.streams.sat_fading, size=self.n), dtype=float)
        # path gain of an empty cap (D = inf) is 0
        return fading * self.cfg.sat_link.path_gain(self.nearest)

    @cached_property
    def snr_ground(self) -> np.ndarray:
        link = analysis.require_platform(self.cfg, "the ground hop")
        fading = np.asarray(self.cfg.fading.sample(self.streams.ground_fading, size=self.n), dtype=float)
        return fading * link.path_gain(self.cfg.geom.platform_altitude_km)

    def counts(self, cap: float) -> np.ndarray:
        return coxnet.count_in_cap(self.sample, cap)


def _as_column(values, indicator: bool = False, mask=None) -> Column:
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        values = values[:, None]
    return Column(values=values, indicator=indicator, mask=mask)


def _grid(spec: MetricSpec) -> np.ndarray:
    return np.asarray(spec.grid, dtype=float)[None, :]


def _gain_columns(ctx: _BlockContext, spec: MetricSpec) -> Dict[str, Column]:
    phi_bar = geometry.extended_cap_angle(ctx.cfg.geom)
    xi_bar = geometry.visible_cap_angle(ctx.cfg.geom)
    return {
        "_orbits-extended": _as_column(coxnet.count_effective_orbits(ctx.sample, phi_bar)),
        "_orbits-visible": _as_column(coxnet.count_effective_orbits(ctx.sample, xi_bar)),
        "_sats-extended": _as_column(ctx.counts(phi_bar)),
        "_sats-visible": _as_column(ctx.counts(xi_bar)),
    }


def _connectivity_gain_columns(ctx: _BlockContext, spec: MetricSpec) -> Dict[str, Column]:
    phi_bar = geometry.extended_cap_angle(ctx.cfg.geom)
    xi_bar = geometry.visible_cap_angle(ctx.cfg.geom)
    return {
        "_connected-extended": _as_column(ctx.counts(phi_bar) > 0, indicator=True),
        "_connected-visible": _as_column(ctx.counts(xi_bar) > 0, indicator=True),
    }


def _zenith_columns(ctx: _BlockContext, spec: MetricSpec) -> Dict[str, Column]:
    if not ctx.cfg.platform_enabled:
        raise MetricSpecError("random-zenith connectivity needs the platform enabled")
    zenith = ctx.streams.zenith.uniform(0.0, spec.zenith_max_rad, size=ctx.n)
    caps = geometry.zenith_cap_angle(ctx.cfg.geom, zenith)
    return {spec.metric_id: _as_column(ctx.counts(caps) > 0, indicator=True)}


def _propagation_columns(ctx: _BlockContext, spec: MetricSpec) -> Dict[str, Column]:
    offset = ctx.cfg.geom.platform_altitude_km if ctx.cfg.platform_enabled else 0.0
    connected = np.isfinite(ctx.nearest)
    delay = np.where(connected, ctx.nearest + offset, 0.0) / SPEED_OF_LIGHT_KM_S
    return {"propagation-delay:mean": _as_column(delay, mask=connected)}


def _rate_columns(ctx: _BlockContext, spec: MetricSpec) -> Dict[str, Column]:
    columns = {"throughput:platform": _as_column(np.log2(1.0 + ctx.snr_platform))}
    if ctx.cfg.platform_enabled:
        columns["throughput:ground"] = _as_column(np.log2(1.0 + ctx.snr_ground))
    return columns


_ESTIMATORS = {
    "effective-orbits": lambda ctx, spec: {
        spec.metric_id: _as_column(coxnet.count_effective_orbits(ctx.sample, ctx.cap))
    },
    "effective-satellites": lambda ctx, spec: {spec.metric_id: _as_column(ctx.counts(ctx.cap))},
    "gain-factors": _gain_columns,
    "connectivity": lambda ctx, spec: {spec.metric_id: _as_column(ctx.counts(ctx.cap) > 0, indicator=True)},
    "connectivity-gain": _connectivity_gain_columns,
    "range-ccdf": lambda ctx, spec: {
        spec.metric_id: _as_column(ctx.nearest[:, None] > _grid(spec), indicator=True)
    },
    "snr-coverage": lambda ctx, spec: {
        spec.metric_id: _as_column(ctx.snr_platform[:, None] >= _grid(spec), indicator=True)
    },
    "snr-coverage-ground": lambda ctx, spec: {
        spec.metric_id: _as_column(ctx.snr_ground[:, None] >= _grid(spec), indicator=True)
    },
    "rate-platform": lambda ctx, spec: {spec.metric_id: _as_column(np.log2(1.0 + ctx.snr_platform))},
    "rate-ground": lambda ctx, spec: {spec.metric_id: _as_column(np.log2(1.0 + ctx.snr_ground))},
    "throughput": _rate_columns,
    "delay-ccdf": lambda ctx, spec: {
        spec.metric_id: _as_column(
            coxnet.first_contact_times(ctx.sample, ctx.cfg.geom, ctx.cap)[:, None] > _grid(spec),
            indicator=True,
        )
    },
    "propagation-delay": _propagation_columns,
    "connectivity-zenith": _zenith_columns,
    "connectivity-elevation": lambda ctx, spec: {
        spec.metric_id: _as_column(coxnet.elevation_visible(ctx.sample, ctx.cfg.geom, spec.kappa_rad), indicator=True)
    },
}

Tally = Dict[str, Tuple[np.ndarray, np.ndarray, np.ndarray, bool]]


def _thinning_cap(cfg: ScenarioConfig, specs: Sequence[MetricSpec]) -> float:
    cap = geometry.extended_cap_angle(cfg.geom)
    for spec in specs:
        if spec.metric_id == "connectivity-zenith":
            cap = max(cap, float(geometry.zenith_cap_angle(cfg.geom, spec.zenith_max_rad)))
    return cap


def _simulate_block(job) -> Tally:
    cfg, specs, master_seed, block_index, n_trials, epoch_s = job
    streams = block_streams(master_seed, block_index)
    sample = coxnet.sample_constellation(
        cfg.densities, streams.constellation, n_trials, thinning_cap=_thinning_cap(cfg, specs)
    )
    if epoch_s:
        sample = coxnet.propagate(sample, cfg.geom, epoch_s)
    ctx = _BlockContext(cfg, streams, sample)

    tally: Tally = {}
    for spec in specs:
        for label, column in _ESTIMATORS[spec.metric_id](ctx, spec).items():
            values = column.values if column.mask is None else column.values[column.mask]
            tally[label] = (
                values.sum(axis=0),
                np.square(values).sum(axis=0),
                np.full(values.shape[1], values.shape[0], dtype=float),
                column.indicator,
            )
    logger.debug("block %d: %d trials, %d satellites", block_index, n_trials, sample.n_satellites)
    return tally


def _combine(tallies: List[Tally]) -> Dict[str, Tuple[np.ndarray, np.ndarray, np.ndarray, bool]]:
    combined = {}
    for label in tallies[0]:
        parts = [t[label] for t in tallies]
        combined[label] = tuple(
            np.array([math.fsum(column) for column in np.stack([p[i] for p in parts]).T]) for i in range(3)
        ) + (parts[0][3],)
    return combined


# =========================
# PUBLIC ESTIMATORS
# =========================


def _check_trials(n_trials: int, specs: Sequence[MetricSpec]) -> None:
    if n_trials < MIN_TRIALS:
        raise MetricSpecError(f"n_trials must be at least {MIN_TRIALS}, got {n_trials}")
    widest_grid = max((len(spec.grid) for spec in specs), default=0)
    resolution = min(STDERR_WARN, 0.25 / (widest_grid + 1))
    worst_stderr = 0.5 / math.sqrt(n_trials)
    if worst_stderr > resolution:
        message = (
            f"{n_trials} trials give standard errors up to {worst_stderr:.3g}, "
            f"coarser than {resolution:.3g} for a {widest_grid}-point grid"
        )
        logger.warning(message)
        warnings.warn(message, SmallSampleWarning, stacklevel=3)


def _summarize(label, totals, params, seed: int) -> List[MetricEstimate]:
    sums, sumsq, counts, indicator = totals
    estimates = []
    for i, param in enumerate(params):
        count = counts[i]
        if count == 0:
            raise MetricSpecError(f"no trial contributes to {label}")
        mean = sums[i] / count
        if indicator:
            variance = mean * (1.0 - mean)
        elif count > 1:
            variance = max(sumsq[i] - sums[i] * mean, 0.0) / (count - 1)
        else:
            variance = 0.0
        estimates.append(
            MetricEstimate(
                metric_id=label,
                param=param,
                mean=float(mean),
                stderr=float(math.sqrt(max(variance, 0.0) / count)),
                n_trials=int(count),
                seed=seed,
                proportion=bool(indicator),
            )
        )
    return estimates


def _ratio(label: str, numerator: MetricEstimate, denominator: MetricEstimate) -> MetricEstimate:
    """Ratio of means; delta-method stderr without the covariance term (conservative)."""
    if denominator.mean == 0.0:
        raise MetricSpecError(f"{label} undefined: denominator mean is 0")
    ratio = numerator.mean / denominator.mean
    relative = math.hypot(
        numerator.stderr / numerator.mean if numerator.mean else 0.0,
        denominator.stderr / denominator.mean,
    )
    return numerator.model_copy(
        update={"metric_id": label, "mean": ratio, "stderr": abs(ratio) * relative, "proportion": False}
    )


def _derived(spec: MetricSpec, by_label: Dict[str, List[MetricEstimate]]) -> List[MetricEstimate]:
    if spec.metric_id == "gain-factors":
        return [
            _ratio("gain-factors:orbit", by_label["_orbits-extended"][0], by_label["_orbits-visible"][0]),
            _ratio("gain-factors:satellite", by_label["_sats-extended"][0], by_label["_sats-visible"][0]),
        ]
    if spec.metric_id == "connectivity-gain":
        return [_ratio(spec.metric_id, by_label["_connected-extended"][0], by_label["_connected-visible"][0])]
    if spec.metric_id == "throughput":
        rates = [by_label["throughput:platform"][0]]
        if "throughput:ground" in by_label:
            rates.append(by_label["throughput:ground"][0])
        # min of the expected rates, not the expected min
        bottleneck = min(rates, key=lambda e: e.mean)
        return rates + [bottleneck.model_copy(update={"metric_id": "throughput:end-to-end"})]
    if spec.metric_id == "propagation-delay":
        return by_label["propagation-delay:mean"]
    return by_label[spec.metric_id]


def estimate_many(
    cfg: ScenarioConfig,
    specs: Sequence[MetricSpec],
    n_trials: int,
    master_seed: int,
    workers: int = 1,
    epoch_s: float = 0.0,
    block_size: int = BLOCK_SIZE,
) -> Dict[str, List[MetricEstimate]]:
    """Estimate several metrics from one set of simulated constellations."""
    if not specs:
        raise MetricSpecError("no metric requested")
    for spec in specs:
        if spec.metric_id not in _ESTIMATORS:
            raise MetricSpecError(f"metric {spec.metric_id} has no simulation estimator")
    _check_trials(n_trials, specs)

    n_blocks = math.ceil(n_trials / block_size)
    jobs = [
        (cfg, tuple(specs), master_seed, k, min(block_size, n_trials - k * block_size), epoch_s)
        for k in range(n_blocks)
    ]
    if workers > 1 and n_blocks > 1:
        with Pool(processes=min(workers, n_blocks)) as pool:
            tallies = pool.map(_simulate_block, jobs)
    else:
        tallies = [_simulate_block(job) for job in jobs]

    combined = _combine(tallies)
    grids = {spec.metric_id: list(spec.grid) for spec in specs if spec.grid}
    by_label = {
        label: _summarize(label, totals, grids.get(label, [None]), master_seed)
        for label, totals in combined.items()
    }

    results = {spec.metric_id: _derived(spec, by_label) for spec in specs}
    logger.info("estimated %d metric(s) from %d trials in %d blocks", len(specs), n_trials, n_blocks)
    return results


def estimate(
    cfg: ScenarioConfig,
    metric: MetricSpec,
    n_trials: int,
    master_seed: int,
    workers: int = 1,
    epoch_s: float = 0.0,
) -> List[MetricEstimate]:
    """One estimate per grid point (or per component for multi-valued metrics)."""
    return estimate_many(cfg, [metric], n_trials, master_seed, workers=workers, epoch_s=epoch_s)[metric.metric_id]


# =========================
# VALIDATION
# =========================


def describe_point(cfg: ScenarioConfig, param_name: Optional[str] = None, param: Optional[float] = None) -> str:
    parts = [
        f"lambda={cfg.densities.mean_orbits:g}",
        f"mu={cfg.densities.mean_sats_per_orbit:g}",
        f"h_a={cfg.geom.platform_altitude_km:g}",
        f"platform={'on' if cfg.platform_enabled else 'off'}",
    ]
    if param_name is not None:
        parts.append(f"{param_name}={param:g}")
    return ";".join(parts)


def comparison_stderr(analytical: float, est: MetricEstimate) -> float:
    """
    Standard error used for the z-score. A proportion estimated as exactly 0 or 1
    has a zero sample stderr; the binomial stderr of the analytical p replaces it.
    """
    if est.proportion and est.stderr == 0.0:
        p = min(max(analytical, 0.0), 1.0)
        return math.sqrt(p * (1.0 - p) / est.n_trials)
    return est.stderr


def z_score(analytical: float, mean: float, stderr: float) -> float:
    gap = abs(analytical - mean)
    if stderr > 0.0:
        return gap / stderr
    return 0.0 if gap <= 1e-9 * max(1.0, abs(analytical)) else math.inf


@dataclass
class ValidationReport:
    rows: List[ValidationRow]
    z_threshold: float = 3.0

    @property
    def flagged(self) -> List[ValidationRow]:
        return [row for row in self.rows if row.flagged(self.z_threshold)]

    def to_frame(self) -> pd.DataFrame:
        columns = ["metric_id", "param_point", "analytical", "mc_mean", "mc_stderr", "z_score"]
        return pd.DataFrame([row.model_dump() for row in self.rows], columns=columns)

    def summary(self) -> str:
        flagged = self.flagged
        lines = [f"{len(self.rows)} comparisons, {len(flagged)} flagged (z > {self.z_threshold:g})"]
        lines += [f"  FLAG {row.metric_id} at {row.param_point}: z={row.z_score:.2f}" for row in flagged]
        return "\n".join(lines)


def validate(
    cfg_grid: Sequence[ScenarioConfig],
    n_trials: int,
    master_seed: int,
    specs_for=None,
    workers: int = 1,
    corrupt_metric: Optional[str] = None,
    z_threshold: float = 3.0,
) -> ValidationReport:
    """
    Compare every analytical metric with its estimator at each grid point.
    corrupt_metric shifts that metric's analytical values by CORRUPTION_OFFSET
    to exercise the detector.
    """
    if not cfg_grid:
        raise MetricSpecError("validation grid is empty")
    specs_for = specs_for or validation_specs
    rows: List[ValidationRow] = []

    for index, cfg in enumerate(cfg_grid):
        point_seed = int(np.random.SeedSequence([master_seed, index]).generate_state(1)[0])
        analytical = {}
        usable = []
        for spec in specs_for(cfg):
            try:
                values = metrics.evaluate(cfg, spec)
            except MetricSpecError as exc:
                logger.info("skipping %s at %s: %s", spec.metric_id, describe_point(cfg), exc)
                continue
            usable.append(spec)
            for value in values:
                analytical[(value.label, value.param)] = value

        simulated = estimate_many(cfg, usable, n_trials, point_seed, workers=workers)
        for spec in usable:
            for est in simulated[spec.metric_id]:
                reference = analytical.get((est.metric_id, est.param))
                if reference is None:
                    continue
                value = reference.value
                if corrupt_metric is not None and spec.metric_id == corrupt_metric:
                    value += CORRUPTION_OFFSET
                stderr = comparison_stderr(value, est)
                rows.append(
                    ValidationRow(
                        metric_id=est.metric_id,
                        param_point=describe_point(cfg, reference.param_name, reference.param),
                        analytical=value,
                        mc_mean=est.mean,
                        mc_stderr=stderr,
                        z_score=z_score(value, est.mean, stderr),
                    )
                )
        logger.info("validated grid point %d/%d: %s", index + 1, len(cfg_grid), describe_point(cfg))

    report = ValidationReport(rows=rows, z_threshold=z_threshold)
    logger.info(report.summary().splitlines()[0])
    return report
