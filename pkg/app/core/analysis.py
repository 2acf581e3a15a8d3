# app/core/analysis.py
"""
Closed-form and quadrature evaluators of the network metrics.

Every evaluator reads the receiving node and its cap from the scenario:
- platform enabled: apex r_a, cap phi_bar (extended cap)
- platform disabled: apex r_e, cap xi_bar (visible cap)

Integrals run over the complement inclination v = pi/2 - phi in [0, cap].
Integral-valued evaluators accept with_error=True and then return an
Evaluation(value, error) instead of a bare float.
"""

import logging
import math
from typing import Callable, NamedTuple, Sequence, Union

import numpy as np
from scipy import optimize

from app.core import geometry
from app.core.quadrature import (
    DEFAULT_SETTINGS,
    SINGULAR_SETTINGS,
    integrate,
    integrate_semi_infinite,
    memoize_quantized,
)
from app.schemas.scenario_schema import LinkBudget, ScenarioConfig
from app.utils.errors import MetricSpecError, ScenarioError
from app.utils.helpers import SPEED_OF_LIGHT_KM_S
from app.utils.validators import ensure_nonnegative, ensure_probability

logger = logging.getLogger(__name__)

COVERAGE_ERROR_LIMIT = 1e-4
_DENSE = 1e12


class Evaluation(NamedTuple):
    value: float
    error: float


class GainFactors(NamedTuple):
    orbit_factor: float
    satellite_factor: float
    orbit_factor_linearized: float


class Throughput(NamedTuple):
    rate_platform_bps_hz: float
    rate_ground_bps_hz: float
    end_to_end_bps_hz: float


class PropagationDelayStats(NamedTuple):
    min_s: float
    mean_s: float
    median_s: float
    p90_s: float
    max_s: float
    connectivity: float


def _finish(result: Evaluation, with_error: bool):
    return result if with_error else result.value


def cap_half_angle(cfg: ScenarioConfig) -> float:
    if cfg.platform_enabled:
        return geometry.extended_cap_angle(cfg.geom)
    return geometry.visible_cap_angle(cfg.geom)


def distance_support(cfg: ScenarioConfig) -> tuple:
    """(r_s - apex, |AC|): range of the nearest in-cap satellite distance."""
    apex = cfg.apex_radius_km
    d_min = cfg.geom.satellite_orbit_radius_km - apex
    return d_min, geometry.cap_chord(cfg.geom, apex, cap_half_angle(cfg))


# --- kernels shared by the distance, coverage and rate evaluators, memoized on the quantized cap angle ---


@memoize_quantized()
def void_exponent(zeta: float, mean_orbits: float, mean_sats: float) -> Evaluation:
    """
    lambda * int_0^zeta cos v (1 - exp(-(mu/pi) g(zeta, v))) dv, the Poisson
    exponent of "no satellite within the cap of half-angle zeta".
    """
    if zeta <= 0.0 or mean_orbits == 0.0 or mean_sats == 0.0:
        return Evaluation(0.0, 0.0)
    rate = mean_sats / math.pi

    def integrand(v):
        return math.cos(v) * -math.expm1(-rate * float(geometry.arc_half_angle_complement(zeta, v)))

    value, error = integrate(integrand, 0.0, zeta, DEFAULT_SETTINGS)
    return Evaluation(mean_orbits * value, mean_orbits * error)


@memoize_quantized()
def density_kernel(zeta: float, mean_orbits: float, mean_sats: float) -> Evaluation:
    """
    int_0^zeta exp(-(mu/pi) g) / sqrt(1 - cos^2 zeta sec^2 v) dv * exp(-exponent),
    the zeta-dependent part of the nearest-distance density.
    """
    exponent = void_exponent(zeta, mean_orbits, mean_sats)
    survival = math.exp(-exponent.value)
    if zeta <= 0.0:
        return Evaluation(0.5 * math.pi * survival, 0.0)
    rate = mean_sats / math.pi

    def integrand(v, vc):
        gap = np.where(vc > 0, vc, zeta - v)
        root = np.sqrt(np.sin(gap) * np.sin(zeta + v)) / np.cos(v)
        return np.exp(-rate * np.arcsin(np.minimum(root, 1.0))) / root

    value, error = integrate(integrand, 0.0, zeta, SINGULAR_SETTINGS, endpoint_distance=True)
    return Evaluation(value * survival, error * survival + value * survival * exponent.error)


def _exponent(cfg: ScenarioConfig, zeta: float) -> Evaluation:
    return void_exponent(zeta, cfg.densities.mean_orbits, cfg.densities.mean_sats_per_orbit)


def _arc_integral(zeta: float) -> Evaluation:
    """int_0^zeta cos v g(zeta, v) dv; equals (pi/2)(1 - cos zeta)."""
    if zeta <= 0.0:
        return Evaluation(0.0, 0.0)
    value, error = integrate(
        lambda v: math.cos(v) * float(geometry.arc_half_angle_complement(zeta, v)), 0.0, zeta
    )
    return Evaluation(value, error)


def _connectivity_for_cap(cfg: ScenarioConfig, zeta: float) -> Evaluation:
    exponent = _exponent(cfg, zeta)
    return Evaluation(-math.expm1(-exponent.value), math.exp(-exponent.value) * exponent.error)


# --- effective orbits and satellites ---


def avg_effective_orbits(cfg: ScenarioConfig) -> float:
    return cfg.densities.mean_orbits * math.sin(cap_half_angle(cfg))


def avg_effective_satellites(cfg: ScenarioConfig, with_error: bool = False):
    scale = cfg.densities.mean_orbits * cfg.densities.mean_sats_per_orbit / math.pi
    arc = _arc_integral(cap_half_angle(cfg))
    return _finish(Evaluation(scale * arc.value, scale * arc.error), with_error)


def gain_factors(cfg: ScenarioConfig) -> GainFactors:
    """Ratios of the platform to the no-platform effective counts (geometry only)."""
    phi_bar = geometry.extended_cap_angle(cfg.geom)
    xi_bar = geometry.visible_cap_angle(cfg.geom)
    epsilon = phi_bar - xi_bar
    return GainFactors(
        orbit_factor=math.sin(phi_bar) / math.sin(xi_bar),
        satellite_factor=_arc_integral(phi_bar).value / _arc_integral(xi_bar).value,
        orbit_factor_linearized=1.0 + epsilon / math.tan(xi_bar),
    )


# --- connectivity ---


def connectivity(cfg: ScenarioConfig, with_error: bool = False):
    return _finish(_connectivity_for_cap(cfg, cap_half_angle(cfg)), with_error)


def connectivity_gain(cfg: ScenarioConfig) -> float:
    with_platform = connectivity(cfg.updated(platform_enabled=True))
    without = connectivity(cfg.updated(platform_enabled=False))
    if without == 0.0:
        raise MetricSpecError("connectivity gain undefined: no-platform connectivity is 0")
    return with_platform / without


def connectivity_min_elevation(cfg: ScenarioConfig, kappa: float, with_error: bool = False):
    if cfg.platform_enabled:
        raise MetricSpecError("minimum-elevation connectivity is defined without platforms")
    return _finish(_connectivity_for_cap(cfg, geometry.min_elevation_cap_angle(cfg.geom, kappa)), with_error)


ZenithLaw = Union[Sequence[float], np.ndarray, object]


def connectivity_random_zenith(cfg: ScenarioConfig, zenith: ZenithLaw, with_error: bool = False):
    """
    Connectivity averaged over the platform's zenith angle Z.

    zenith is either a list of samples or a frozen scipy.stats distribution
    (anything with pdf() and support()); each Z widens the cap to phi_hat(Z).
    """
    if not cfg.platform_enabled:
        raise MetricSpecError("random-zenith connectivity needs the platform enabled")

    def connected(z: float) -> Evaluation:
        return _connectivity_for_cap(cfg, float(geometry.zenith_cap_angle(cfg.geom, z)))

    if hasattr(zenith, "pdf") and hasattr(zenith, "support"):
        low, high = (float(b) for b in zenith.support())
        if not (0.0 <= low and math.isfinite(high) and high < 0.5 * math.pi):
            raise MetricSpecError(f"zenith support [{low}, {high}] must lie inside [0, pi/2)")
        geometry.zenith_cap_angle(cfg.geom, high)
        value, error = integrate(lambda z: connected(z).value * float(zenith.pdf(z)), low, high)
        return _finish(Evaluation(value, error), with_error)

    samples = np.asarray(zenith, dtype=float)
    if samples.size == 0:
        raise MetricSpecError("zenith sample list is empty")
    if np.any(samples < 0.0) or np.any(samples >= 0.5 * math.pi):
        raise MetricSpecError("zenith samples must lie inside [0, pi/2)")
    geometry.zenith_cap_angle(cfg.geom, samples)
    results = [connected(z) for z in samples]
    return _finish(
        Evaluation(
            float(np.mean([r.value for r in results])), float(np.mean([r.error for r in results]))
        ),
        with_error,
    )


# --- nearest-satellite distance ---


def nearest_distance_ccdf(cfg: ScenarioConfig, d: float, with_error: bool = False):
    """P(D > d), D = distance to the nearest in-cap satellite (inf when the cap is empty)."""
    d_min, d_max = distance_support(cfg)
    if d <= d_min:
        return _finish(Evaluation(1.0, 0.0), with_error)
    if d >= d_max:
        zeta = cap_half_angle(cfg)
    else:
        zeta = geometry.critical_inclination(cfg.geom, cfg.apex_radius_km, d)
    exponent = _exponent(cfg, zeta)
    survival = math.exp(-exponent.value)
    return _finish(Evaluation(survival, survival * exponent.error), with_error)


def nearest_distance_pdf(cfg: ScenarioConfig, z: float) -> float:
    """
    Density of D on (r_s - apex, |AC|):
    lambda mu z / (pi r_s apex) * kernel(zeta(z)); zero outside.
    The density integrates to connectivity(cfg), not to 1.
    """
    d_min, d_max = distance_support(cfg)
    if z <= d_min or z > d_max:
        return 0.0
    lam, mu = cfg.densities.mean_orbits, cfg.densities.mean_sats_per_orbit
    if lam == 0.0 or mu == 0.0:
        return 0.0
    apex = cfg.apex_radius_km
    zeta = geometry.critical_inclination(cfg.geom, apex, z)
    scale = lam * mu * z / (math.pi * cfg.geom.satellite_orbit_radius_km * apex)
    return scale * density_kernel(zeta, lam, mu).value


def _solve_decreasing(func: Callable[[float], float], target: float, low: float, high: float) -> float:
    return optimize.brentq(lambda x: func(x) - target, low, high, xtol=1e-10, rtol=1e-12)


def nearest_distance_quantile(cfg: ScenarioConfig, q: float) -> float:
    """Unconditional q-quantile of D; inf when the cap is empty with probability > 1 - q."""
    ensure_probability(q, "q")
    d_min, d_max = distance_support(cfg)
    target = 1.0 - q
    if target >= 1.0:
        return d_min
    if target < nearest_distance_ccdf(cfg, d_max):
        return math.inf
    return _solve_decreasing(lambda d: nearest_distance_ccdf(cfg, d), target, d_min, d_max)


# --- SNR coverage and rates ---


def _coverage_breakpoints(cfg: ScenarioConfig, tau: float, d_min: float, d_max: float) -> list:
    link = cfg.sat_link
    points = []
    for jump in cfg.fading.jump_points():
        # tau z^alpha / eta = jump
        z = (jump * link.eta / tau) ** (1.0 / link.path_loss_exponent) / 1000.0
        if d_min < z < d_max:
            points.append(z)
    return points


def snr_coverage_platform(cfg: ScenarioConfig, tau: float, with_error: bool = False):
    """
    P(SNR >= tau) at the receiving node, nearest in-cap satellite association.
    Realizations with an empty cap count as not covered, so tau -> 0 gives connectivity.
    """
    ensure_nonnegative(tau, "tau")
    d_min, d_max = distance_support(cfg)
    if cfg.densities.mean_orbits == 0.0 or cfg.densities.mean_sats_per_orbit == 0.0:
        return _finish(Evaluation(0.0, 0.0), with_error)
    if tau == 0.0:
        return connectivity(cfg, with_error)
    link = cfg.sat_link
    model = cfg.fading

    def integrand(z: float) -> float:
        return float(model.ccdf(link.normalized_threshold(tau, z))) * nearest_distance_pdf(cfg, z)

    breakpoints = _coverage_breakpoints(cfg, tau, d_min, d_max)
    value, error = integrate(integrand, d_min, d_max, DEFAULT_SETTINGS, points=breakpoints)
    if error > COVERAGE_ERROR_LIMIT:
        logger.warning("SNR coverage at tau=%g has error estimate %.2e", tau, error)
    return _finish(Evaluation(min(max(value, 0.0), 1.0), error), with_error)


def snr_coverage_platform_conditional(cfg: ScenarioConfig, tau: float) -> float:
    """SNR coverage given that some satellite is in the cap."""
    conn = connectivity(cfg)
    if conn == 0.0:
        raise MetricSpecError("conditional coverage undefined: connectivity is 0")
    return min(snr_coverage_platform(cfg, tau) / conn, 1.0)


def require_platform(cfg: ScenarioConfig, what: str) -> LinkBudget:
    if not cfg.platform_enabled:
        raise MetricSpecError(f"{what} exists only with the platform enabled")
    return cfg.platform_link


def snr_coverage_ground(cfg: ScenarioConfig, tau: float) -> float:
    """Platform-to-gateway hop over the platform altitude h_a."""
    link = require_platform(cfg, "the ground hop")
    ensure_nonnegative(tau, "tau")
    return float(cfg.fading.ccdf(link.normalized_threshold(tau, cfg.geom.platform_altitude_km)))


def rate_platform(cfg: ScenarioConfig, with_error: bool = False):
    """Expected log2(1 + SNR) of the satellite hop: int_0^inf P_cov(2^u - 1) du."""
    if cfg.densities.mean_orbits == 0.0 or cfg.densities.mean_sats_per_orbit == 0.0:
        return _finish(Evaluation(0.0, 0.0), with_error)
    d_min, d_max = distance_support(cfg)
    link = cfg.sat_link
    breakpoints = []
    for jump in cfg.fading.jump_points():
        for z in (d_min, d_max):
            breakpoints.append(math.log2(1.0 + jump * link.path_gain(z)))
    value, error = integrate_semi_infinite(
        lambda u: snr_coverage_platform(cfg, math.expm1(u * math.log(2.0))),
        DEFAULT_SETTINGS,
        breakpoints=breakpoints,
    )
    return _finish(Evaluation(value, error), with_error)


def rate_ground(cfg: ScenarioConfig, with_error: bool = False):
    link = require_platform(cfg, "the ground hop")
    gain = link.path_gain(cfg.geom.platform_altitude_km)
    breakpoints = [math.log2(1.0 + jump * gain) for jump in cfg.fading.jump_points()]
    value, error = integrate_semi_infinite(
        lambda u: float(cfg.fading.ccdf(math.expm1(u * math.log(2.0)) / gain)),
        DEFAULT_SETTINGS,
        breakpoints=breakpoints,
    )
    return _finish(Evaluation(value, error), with_error)


def throughput(cfg: ScenarioConfig) -> Throughput:
    """
    - rate_platform: satellite hop R_A
    - rate_ground: platform-to-gateway hop R_G (inf without a platform)
    - end_to_end: min(R_A, R_G), the minimum of the two expected rates
    """
    r_a = rate_platform(cfg)
    r_g = rate_ground(cfg) if cfg.platform_enabled else math.inf
    return Throughput(r_a, r_g, min(r_a, r_g))


# --- association and propagation delay ---


def delay_ccdf(cfg: ScenarioConfig, t: float, with_error: bool = False):
    """
    P(T > t) for the wait until a satellite enters the cap. An orbit's swept
    arc nu*t + 2g is capped at 2pi.
    """
    ensure_nonnegative(t, "t")
    zeta = cap_half_angle(cfg)
    lam, mu = cfg.densities.mean_orbits, cfg.densities.mean_sats_per_orbit
    if lam == 0.0 or mu == 0.0:
        return _finish(Evaluation(1.0, 0.0), with_error)
    if t == 0.0:
        exponent = _exponent(cfg, zeta)
    else:
        sweep = cfg.geom.satellite_angular_speed_rad_s * t
        rate = mu / (2.0 * math.pi)

        def integrand(v: float) -> float:
            arc = min(sweep + 2.0 * float(geometry.arc_half_angle_complement(zeta, v)), 2.0 * math.pi)
            return math.cos(v) * -math.expm1(-rate * arc)

        value, error = integrate(integrand, 0.0, zeta)
        exponent = Evaluation(lam * value, lam * error)
    survival = math.exp(-exponent.value)
    return _finish(Evaluation(survival, survival * exponent.error), with_error)


def delay_ccdf_asymptotic(cfg: ScenarioConfig) -> float:
    """mu -> inf floor of the delay CCDF: exp(-lambda sin(cap))."""
    return math.exp(-avg_effective_orbits(cfg))


def delay_quantile(cfg: ScenarioConfig, q: float) -> float:
    """q-quantile of the association delay in seconds (inf if never reached)."""
    ensure_probability(q, "q")
    target = 1.0 - q
    if target >= delay_ccdf(cfg, 0.0):
        return 0.0
    horizon = 2.0 * math.pi / cfg.geom.satellite_angular_speed_rad_s
    if target < delay_ccdf(cfg, horizon):
        return math.inf
    return _solve_decreasing(lambda t: delay_ccdf(cfg, t), target, 0.0, horizon)


def fit_density_for_delay_quantile(
    cfg: ScenarioConfig,
    target_s: float,
    q: float = 0.7,
    parameter: str = "mean_sats_per_orbit",
    bracket: tuple = (1e-3, 1e3),
) -> float:
    """
    Solve for mu (or lambda, with parameter="mean_orbits") so that the q-quantile
    of the delay equals target_s, the other density held fixed.
    """
    if parameter not in ("mean_sats_per_orbit", "mean_orbits"):
        raise ScenarioError(f"cannot fit parameter {parameter!r}")
    if target_s <= 0.0:
        raise ScenarioError("target delay must be positive")

    def mismatch(log_density: float) -> float:
        trial = cfg.updated(**{parameter: math.exp(log_density)})
        quantile = delay_quantile(trial, q)
        return min(quantile, _DENSE) - target_s

    low, high = (math.log(b) for b in bracket)
    if mismatch(low) * mismatch(high) > 0.0:
        raise ScenarioError(f"target {target_s} s not reachable for {parameter} in {bracket}")
    return math.exp(optimize.brentq(mismatch, low, high, xtol=1e-8))


def propagation_delay_stats(cfg: ScenarioConfig) -> PropagationDelayStats:
    """
    One-way propagation delay (D + h_a)/c_l given that some satellite is in the cap;
    h_a = 0 without a platform.
    """
    conn = connectivity(cfg)
    if conn == 0.0:
        raise MetricSpecError("propagation delay undefined: connectivity is 0")
    d_min, d_max = distance_support(cfg)
    empty = 1.0 - conn
    offset = cfg.geom.platform_altitude_km if cfg.platform_enabled else 0.0

    def conditional_ccdf(d: float) -> float:
        return min(max((nearest_distance_ccdf(cfg, d) - empty) / conn, 0.0), 1.0)

    def quantile(p: float) -> float:
        return _solve_decreasing(conditional_ccdf, 1.0 - p, d_min, d_max)

    excess, _ = integrate(conditional_ccdf, d_min, d_max)
    return PropagationDelayStats(
        min_s=(d_min + offset) / SPEED_OF_LIGHT_KM_S,
        mean_s=(d_min + excess + offset) / SPEED_OF_LIGHT_KM_S,
        median_s=(quantile(0.5) + offset) / SPEED_OF_LIGHT_KM_S,
        p90_s=(quantile(0.9) + offset) / SPEED_OF_LIGHT_KM_S,
        max_s=(d_max + offset) / SPEED_OF_LIGHT_KM_S,
        connectivity=conn,
    )


def propagation_delay_ccdf(cfg: ScenarioConfig, t: float) -> float:
    """P(T_prop > t | connected)."""
    conn = connectivity(cfg)
    if conn == 0.0:
        raise MetricSpecError("propagation delay undefined: connectivity is 0")
    offset = cfg.geom.platform_altitude_km if cfg.platform_enabled else 0.0
    d = SPEED_OF_LIGHT_KM_S * t - offset
    return min(max((nearest_distance_ccdf(cfg, d) - (1.0 - conn)) / conn, 0.0), 1.0)
