# tests/test_analysis.py
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate as sp_integrate
from scipy import stats

from app.core import analysis, geometry, metrics
from app.core.fading import NoFading
from app.core.standards import table1_scenario
from app.schemas.estimate_schema import MetricSpec
from app.utils.errors import MetricSpecError, ScenarioError
from app.utils.helpers import SPEED_OF_LIGHT_KM_S


def point(lam, mu, h_a=20.0, platform=True):
    return table1_scenario(
        mean_orbits=lam, mean_sats_per_orbit=mu, platform_altitude_km=h_a, platform_enabled=platform
    )


# =========================
# Effective orbits and satellites
# =========================


@pytest.mark.parametrize("platform", [True, False])
def test_effective_satellites_closed_form(platform):
    cfg = point(15.0, 10.0, platform=platform)
    cap = analysis.cap_half_angle(cfg)
    expected = 15.0 * 10.0 * (1.0 - math.cos(cap)) / 2.0
    assert analysis.avg_effective_satellites(cfg) == pytest.approx(expected, rel=1e-7)


def test_effective_satellites_reference_values():
    # about 6 satellites in view of the gateway, about 8.5 from a 20 km platform
    assert analysis.avg_effective_satellites(point(15.0, 10.0, platform=False)) == pytest.approx(6.0, abs=0.7)
    assert analysis.avg_effective_satellites(point(15.0, 10.0)) == pytest.approx(8.0, abs=0.7)


def test_effective_orbits_and_error_estimate(table1):
    assert analysis.avg_effective_orbits(table1) == pytest.approx(
        25.0 * math.sin(geometry.extended_cap_angle(table1.geom)), rel=1e-14
    )
    result = analysis.avg_effective_satellites(table1, with_error=True)
    assert isinstance(result, analysis.Evaluation)
    assert 0.0 <= result.error < 1e-6


def test_empty_process():
    cfg = point(0.0, 0.0)
    assert analysis.avg_effective_orbits(cfg) == 0.0
    assert analysis.avg_effective_satellites(cfg) == 0.0
    assert analysis.connectivity(cfg) == 0.0
    assert analysis.delay_ccdf(cfg, 100.0) == 1.0
    assert analysis.snr_coverage_platform(cfg, 1.0) == 0.0
    assert analysis.rate_platform(cfg) == 0.0
    assert analysis.nearest_distance_pdf(cfg, 600.0) == 0.0


def test_gain_factors_are_one_at_ground_level():
    factors = analysis.gain_factors(point(5.0, 5.0, h_a=0.0))
    assert factors == (1.0, 1.0, 1.0)


def test_gain_factors_reference_platform(table1):
    factors = analysis.gain_factors(table1)
    assert factors.orbit_factor > 1.0
    assert factors.satellite_factor > factors.orbit_factor
    assert factors.orbit_factor_linearized == pytest.approx(factors.orbit_factor, rel=0.01)


@pytest.mark.parametrize("h_a", [1.0, 0.1, 0.01])
def test_linearized_orbit_factor_residual_is_second_order(h_a):
    cfg = point(5.0, 5.0, h_a=h_a)
    epsilon = geometry.extended_cap_angle(cfg.geom) - geometry.visible_cap_angle(cfg.geom)
    factors = analysis.gain_factors(cfg)
    residual = factors.orbit_factor - factors.orbit_factor_linearized
    assert residual / epsilon ** 2 == pytest.approx(-0.5, rel=0.05)


# =========================
# Connectivity
# =========================


def test_connectivity_reference_values():
    without = analysis.connectivity(point(9.0, 15.0, platform=False))
    with_platform = analysis.connectivity(point(9.0, 9.0))
    assert without == pytest.approx(0.9307, abs=2e-3)
    assert with_platform == pytest.approx(0.90, abs=0.05)
    # a 20 km platform buys the same connectivity with fewer satellites per orbit
    assert abs(without - with_platform) < 0.03


def test_platform_saves_two_satellites_per_orbit():
    gateway = analysis.connectivity(point(9.0, 9.0, platform=False))
    platform = analysis.connectivity(point(9.0, 7.0))
    assert gateway == pytest.approx(0.872, abs=0.01)
    assert platform == pytest.approx(0.904, abs=5e-3)
    assert platform > gateway


def test_connectivity_is_monotone_in_densities():
    by_orbits = [analysis.connectivity(point(lam, 5.0)) for lam in (1.0, 5.0, 10.0)]
    by_sats = [analysis.connectivity(point(5.0, mu)) for mu in (1.0, 5.0, 10.0)]
    assert by_orbits == sorted(by_orbits) and len(set(by_orbits)) == 3
    assert by_sats == sorted(by_sats) and len(set(by_sats)) == 3


def test_connectivity_grows_with_platform_altitude():
    values = [analysis.connectivity(point(5.0, 5.0, h_a=h)) for h in (0.0, 20.0, 40.0, 100.0)]
    assert np.all(np.diff(values) > 0)


def test_connectivity_gain():
    gain = analysis.connectivity_gain(point(3.0, 3.0))
    assert gain > 1.0
    with pytest.raises(MetricSpecError):
        analysis.connectivity_gain(point(0.0, 3.0))


@settings(max_examples=25, deadline=None)
@given(
    lam=st.floats(0.5, 30.0),
    mu=st.floats(0.5, 30.0),
    h_a=st.floats(0.0, 40.0),
    platform=st.booleans(),
)
def test_connectivity_range_and_delay_agree(lam, mu, h_a, platform):
    cfg = point(lam, mu, h_a=h_a, platform=platform)
    conn = analysis.connectivity(cfg)
    _, d_max = analysis.distance_support(cfg)
    assert 0.0 <= conn <= 1.0
    assert abs(analysis.nearest_distance_ccdf(cfg, d_max) - (1.0 - conn)) <= 1e-10
    assert abs(analysis.delay_ccdf(cfg, 0.0) - (1.0 - conn)) <= 1e-10


def test_min_elevation_at_zero_is_plain_connectivity(no_platform):
    assert analysis.connectivity_min_elevation(no_platform, 0.0) == pytest.approx(
        analysis.connectivity(no_platform), abs=1e-10
    )


def test_min_elevation_is_monotone():
    cfg = point(5.0, 5.0, platform=False)
    values = [analysis.connectivity_min_elevation(cfg, math.radians(k)) for k in (0.0, 10.0, 20.0, 40.0)]
    assert np.all(np.diff(values) < 0)


def test_min_elevation_requires_platform_off(table1):
    with pytest.raises(MetricSpecError):
        analysis.connectivity_min_elevation(table1, 0.1)


def test_zenith_at_zero_is_plain_connectivity():
    cfg = point(5.0, 5.0)
    assert analysis.connectivity_random_zenith(cfg, [0.0]) == pytest.approx(analysis.connectivity(cfg), abs=1e-10)


def test_zenith_spread_increases_connectivity():
    cfg = point(5.0, 5.0)
    averaged = analysis.connectivity_random_zenith(cfg, stats.uniform(loc=0.0, scale=math.pi / 6))
    sampled = analysis.connectivity_random_zenith(cfg, [0.0, math.pi / 12, math.pi / 6])
    assert averaged > analysis.connectivity(cfg)
    assert sampled > analysis.connectivity(cfg)


def test_zenith_rejects_bad_inputs(no_platform, table1):
    with pytest.raises(MetricSpecError):
        analysis.connectivity_random_zenith(no_platform, [0.0])
    with pytest.raises(MetricSpecError):
        analysis.connectivity_random_zenith(table1, [])
    with pytest.raises(MetricSpecError):
        analysis.connectivity_random_zenith(table1, [math.pi / 2])


# =========================
# Nearest-satellite distance
# =========================


@pytest.mark.parametrize("platform", [True, False])
def test_distance_ccdf_is_a_survival_function(platform):
    cfg = point(5.0, 5.0, platform=platform)
    d_min, d_max = analysis.distance_support(cfg)
    grid = np.linspace(d_min, d_max, 12)
    values = [analysis.nearest_distance_ccdf(cfg, d) for d in grid]
    assert values[0] == 1.0
    assert np.all(np.diff(values) < 0)
    assert analysis.nearest_distance_ccdf(cfg, d_min - 10.0) == 1.0
    assert analysis.nearest_distance_ccdf(cfg, d_max + 10.0) == pytest.approx(values[-1], abs=1e-15)


@pytest.mark.parametrize("platform", [True, False])
def test_distance_density_integrates_to_connectivity(platform):
    cfg = point(5.0, 5.0, platform=platform)
    d_min, d_max = analysis.distance_support(cfg)
    total, _ = sp_integrate.quad(lambda z: analysis.nearest_distance_pdf(cfg, z), d_min, d_max, limit=200)
    assert total == pytest.approx(analysis.connectivity(cfg), abs=1e-6)


def test_distance_density_matches_ccdf_slope():
    cfg = point(5.0, 5.0)
    d_min, d_max = analysis.distance_support(cfg)
    z, step = 0.5 * (d_min + d_max), 1.0
    slope = (analysis.nearest_distance_ccdf(cfg, z - step) - analysis.nearest_distance_ccdf(cfg, z + step)) / (
        2 * step
    )
    assert analysis.nearest_distance_pdf(cfg, z) == pytest.approx(slope, rel=1e-4)
    assert analysis.nearest_distance_pdf(cfg, d_max + 1.0) == 0.0


def test_distance_quantile(table1):
    median = analysis.nearest_distance_quantile(table1, 0.5)
    assert analysis.nearest_distance_ccdf(table1, median) == pytest.approx(0.5, abs=1e-8)
    assert analysis.nearest_distance_quantile(table1, 0.0) == analysis.distance_support(table1)[0]
    # connectivity below one half: the median distance does not exist
    assert analysis.nearest_distance_quantile(point(1.0, 1.0, platform=False), 0.5) == math.inf


# =========================
# SNR coverage and rates
# =========================


@pytest.mark.parametrize("platform", [True, False])
def test_vanishing_threshold_gives_connectivity(platform):
    cfg = point(5.0, 5.0, platform=platform)
    assert analysis.snr_coverage_platform(cfg, 1e-12) == pytest.approx(analysis.connectivity(cfg), abs=1e-6)
    assert analysis.snr_coverage_platform(cfg, 0.0) == analysis.connectivity(cfg)


def test_snr_coverage_decreases_with_threshold(table1):
    values = [analysis.snr_coverage_platform(table1, 10 ** (db / 10)) for db in (-5.0, 10.0, 30.0)]
    assert values[0] > values[1] > values[2] >= 0.0


def test_conditional_coverage(table1):
    tau = 10.0
    conditional = analysis.snr_coverage_platform_conditional(table1, tau)
    assert analysis.snr_coverage_platform(table1, tau) <= conditional <= 1.0


def test_snr_coverage_without_fading_uses_breakpoints():
    cfg = point(5.0, 5.0).model_copy(update={"fading": NoFading()})
    d_min, d_max = analysis.distance_support(cfg)
    # the threshold that puts the coverage edge at the middle of the support
    edge = 0.5 * (d_min + d_max)
    tau = cfg.sat_link.path_gain(edge)
    expected = 1.0 - analysis.nearest_distance_ccdf(cfg, edge)
    assert analysis.snr_coverage_platform(cfg, tau) == pytest.approx(expected, abs=1e-7)


def test_ground_coverage_rayleigh(table1):
    tau = 1e7
    gain = table1.platform_link.path_gain(20.0)
    assert analysis.snr_coverage_ground(table1, tau) == pytest.approx(math.exp(-tau / gain), rel=1e-12)


def test_ground_rate_without_fading(table1):
    cfg = table1.model_copy(update={"fading": NoFading()})
    expected = math.log2(1.0 + cfg.platform_link.path_gain(20.0))
    assert analysis.rate_ground(cfg) == pytest.approx(expected, rel=1e-8)


def test_ground_hop_needs_platform(no_platform):
    with pytest.raises(MetricSpecError):
        analysis.snr_coverage_ground(no_platform, 1.0)
    with pytest.raises(MetricSpecError):
        analysis.rate_ground(no_platform)


def test_ground_hop_at_ground_level_is_one_metre_long(table1):
    cfg = table1.updated(platform_altitude_km=0.0)
    link = cfg.platform_link
    assert link.path_gain(0.0) == pytest.approx(link.eta)
    assert link.path_gain(0.0005) == pytest.approx(link.eta)
    assert link.path_gain(0.002) == pytest.approx(link.eta / 4.0)
    tau = 1e15
    assert analysis.snr_coverage_ground(cfg, tau) == pytest.approx(math.exp(-tau / link.eta), rel=1e-12)
    [rate] = metrics.evaluate(cfg, MetricSpec(metric_id="rate-ground"))
    assert math.isfinite(rate.value)
    assert rate.value > analysis.rate_ground(table1)


@pytest.mark.slow
def test_platform_rate_matches_coverage_integral():
    cfg = point(5.0, 5.0)
    u = np.linspace(0.0, 40.0, 321)
    coverage = [analysis.snr_coverage_platform(cfg, 2.0 ** x - 1.0) for x in u]
    assert analysis.rate_platform(cfg) == pytest.approx(sp_integrate.trapezoid(coverage, u), abs=1e-3)


@pytest.mark.slow
def test_throughput_is_bottleneck():
    result = analysis.throughput(point(5.0, 5.0))
    assert result.end_to_end_bps_hz == min(result.rate_platform_bps_hz, result.rate_ground_bps_hz)
    assert analysis.throughput(point(5.0, 5.0, platform=False)).rate_ground_bps_hz == math.inf


# =========================
# Delays
# =========================


def test_delay_ccdf_decreases_to_its_horizon_value():
    cfg = point(6.0, 1.0, platform=False)
    values = [analysis.delay_ccdf(cfg, t) for t in (0.0, 10.0, 100.0, 1000.0, 5000.0)]
    assert np.all(np.diff(values) < 0)
    horizon = 2 * math.pi / cfg.geom.satellite_angular_speed_rad_s
    cap = analysis.cap_half_angle(cfg)
    expected = math.exp(-6.0 * math.sin(cap) * -math.expm1(-1.0))
    assert analysis.delay_ccdf(cfg, horizon) == pytest.approx(expected, rel=1e-9)
    assert analysis.delay_ccdf(cfg, 3 * horizon) == pytest.approx(expected, rel=1e-9)


def test_dense_orbits_reach_the_delay_floor(table1):
    cfg = table1.updated(mean_sats_per_orbit=1e4)
    floor = analysis.delay_ccdf_asymptotic(cfg)
    assert floor == pytest.approx(math.exp(-analysis.avg_effective_orbits(cfg)))
    for t in (10.0, 100.0):
        assert analysis.delay_ccdf(cfg, t) == pytest.approx(floor, rel=1e-5)


def test_delay_quantile_inverts_ccdf():
    cfg = point(6.0, 1.0, platform=False)
    t70 = analysis.delay_quantile(cfg, 0.7)
    assert 0.0 < t70 < 2 * math.pi / cfg.geom.satellite_angular_speed_rad_s
    assert analysis.delay_ccdf(cfg, t70) == pytest.approx(0.3, abs=1e-8)
    assert analysis.delay_quantile(cfg, 0.0) == 0.0
    assert analysis.delay_quantile(cfg, 0.9) == math.inf


def test_fit_density_recovers_satellites_per_orbit():
    cfg = point(6.0, 1.0, platform=False)
    target = analysis.delay_quantile(cfg, 0.7)
    fitted = analysis.fit_density_for_delay_quantile(cfg, target, q=0.7)
    assert fitted == pytest.approx(1.0, rel=1e-4)


def test_fit_density_rejects_bad_requests():
    cfg = point(6.0, 1.0, platform=False)
    with pytest.raises(ScenarioError):
        analysis.fit_density_for_delay_quantile(cfg, 100.0, parameter="altitude")
    with pytest.raises(ScenarioError):
        analysis.fit_density_for_delay_quantile(cfg, -1.0)


def test_propagation_delay_summary():
    cfg = point(5.0, 5.0)
    summary = analysis.propagation_delay_stats(cfg)
    d_min, d_max = analysis.distance_support(cfg)
    assert summary.min_s == pytest.approx((d_min + 20.0) / SPEED_OF_LIGHT_KM_S)
    assert summary.max_s == pytest.approx((d_max + 20.0) / SPEED_OF_LIGHT_KM_S)
    assert summary.min_s < summary.median_s < summary.p90_s < summary.max_s
    assert summary.min_s < summary.mean_s < summary.max_s
    assert analysis.propagation_delay_ccdf(cfg, summary.median_s) == pytest.approx(0.5, abs=1e-8)
    with pytest.raises(MetricSpecError):
        analysis.propagation_delay_stats(point(0.0, 5.0))


# =========================
# Metric registry
# =========================


def test_registry_labels(table1):
    rows = metrics.evaluate(table1, MetricSpec(metric_id="gain-factors"))
    assert [r.label for r in rows] == ["gain-factors:orbit", "gain-factors:satellite", "gain-factors:orbit-linearized"]
    d_min, d_max = analysis.distance_support(table1)
    rows = metrics.evaluate(table1, MetricSpec(metric_id="range-ccdf", grid=(d_min, d_max)))
    assert [(r.param_name, r.param) for r in rows] == [("d_km", d_min), ("d_km", d_max)]
    assert rows[0].value == 1.0


def test_registry_drops_platform_for_elevation(table1):
    rows = metrics.evaluate(table1, MetricSpec(metric_id="connectivity-elevation", kappa_rad=0.0))
    assert rows[0].value == pytest.approx(analysis.connectivity(table1.updated(platform_enabled=False)), abs=1e-10)
