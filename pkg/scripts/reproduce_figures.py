# scripts/reproduce_figures.py
"""
Writes the CSV data behind the standard plots (snapshot, connectivity, coverage, range, delay, rate) into one directory.

    python -m scripts.reproduce_figures [out_dir]

Rates need the nested coverage integral at every node and dominate the run time.
"""

import logging
import sys
from pathlib import Path

import numpy as np
import pandas as pd

from app.core import analysis, coxnet
from app.core.standards import table1_scenario
from app.utils.helpers import db_to_linear, write_csv

logger = logging.getLogger("scripts.reproduce_figures")

SNAPSHOT_SEED = 2024
DELAY_TARGET_S = 520.0
DELAY_QUANTILE = 0.7
DELAY_MEAN_ORBITS = 5.5


def _write(out_dir: Path, name: str, rows) -> None:
    frame = rows if isinstance(rows, pd.DataFrame) else pd.DataFrame(rows)
    write_csv(frame, str(out_dir / name))
    logger.info("wrote %s (%d rows)", name, len(frame))


def _variants(base, h_a_values=(20.0,)):
    """(label, cfg) for the gateway-only case and each platform altitude."""
    yield "no-platform", base.updated(platform_enabled=False)
    for h_a in h_a_values:
        yield f"h_a={h_a:g}km", base.updated(platform_enabled=True, platform_altitude_km=h_a)


# =========================
# 1. SNAPSHOT (lambda=20, mu=50)
# =========================


def snapshot(out_dir: Path) -> None:
    cfg = table1_scenario(mean_orbits=20.0, mean_sats_per_orbit=50.0)
    rng = np.random.default_rng(np.random.SeedSequence(SNAPSHOT_SEED))
    sample = coxnet.sample_constellation(cfg.densities, rng)
    _write(out_dir, "snapshot.csv", coxnet.snapshot_frame(sample, cfg.geom, cfg.ground_node_count))


# =========================
# 2. EFFECTIVE SATELLITES AND CONNECTIVITY
# =========================


def effective_satellites(out_dir: Path) -> None:
    rows = []
    for lam in range(1, 26):
        base = table1_scenario(mean_orbits=float(lam), mean_sats_per_orbit=10.0)
        for label, cfg in _variants(base, (20.0, 40.0)):
            rows.append({"lambda": lam, "mu": 10.0, "case": label, "value": analysis.avg_effective_satellites(cfg)})
    _write(out_dir, "effective_satellites.csv", rows)


def connectivity_vs_density(out_dir: Path) -> None:
    rows = []
    for mu in (5.0, 10.0, 15.0):
        for lam in range(3, 16):
            base = table1_scenario(mean_orbits=float(lam), mean_sats_per_orbit=mu)
            for label, cfg in _variants(base):
                rows.append({"lambda": lam, "mu": mu, "case": label, "value": analysis.connectivity(cfg)})
    _write(out_dir, "connectivity_density.csv", rows)


def connectivity_vs_altitude(out_dir: Path) -> None:
    rows = []
    for lam, mu in ((5.0, 5.0), (9.0, 9.0)):
        for h_a in np.arange(0.0, 101.0, 5.0):
            cfg = table1_scenario(mean_orbits=lam, mean_sats_per_orbit=mu, platform_altitude_km=float(h_a))
            rows.append({"lambda": lam, "mu": mu, "h_a_km": h_a, "value": analysis.connectivity(cfg)})
    _write(out_dir, "connectivity_altitude.csv", rows)


# =========================
# 3. SNR COVERAGE AND RANGE
# =========================


def snr_coverage(out_dir: Path) -> None:
    rows = []
    for label, cfg in _variants(table1_scenario(), (20.0, 40.0)):
        for tau_db in np.linspace(-5.0, 30.0, 15):
            value = analysis.snr_coverage_platform(cfg, db_to_linear(tau_db))
            rows.append({"case": label, "tau_db": tau_db, "value": value})
    _write(out_dir, "snr_coverage.csv", rows)


def nearest_range(out_dir: Path) -> None:
    cases = [
        ("h_a=20km, mu=15", table1_scenario(mean_orbits=10.0, mean_sats_per_orbit=15.0)),
        ("no-platform, mu=15", table1_scenario(mean_orbits=10.0, mean_sats_per_orbit=15.0, platform_enabled=False)),
        ("no-platform, mu=23", table1_scenario(mean_orbits=10.0, mean_sats_per_orbit=23.0, platform_enabled=False)),
    ]
    rows, medians = [], []
    for label, cfg in cases:
        d_min, d_max = analysis.distance_support(cfg)
        for d in np.linspace(d_min, d_max, 40):
            rows.append({"case": label, "d_km": d, "value": analysis.nearest_distance_ccdf(cfg, d)})
        medians.append({"case": label, "median_km": analysis.nearest_distance_quantile(cfg, 0.5)})
    _write(out_dir, "range_ccdf.csv", rows)
    _write(out_dir, "range_median.csv", medians)


# =========================
# 4. THROUGHPUT
# =========================


def throughput(out_dir: Path) -> None:
    # N0 * B = -101 dBm at B = 10 MHz
    rows = []
    for lam in (5.0, 10.0, 15.0, 20.0, 25.0):
        base = table1_scenario(mean_orbits=lam, noise_density_dbm_hz=-171.0)
        for label, cfg in _variants(base):
            result = analysis.throughput(cfg)
            rows.append(
                {
                    "lambda": lam,
                    "case": label,
                    "rate_platform": result.rate_platform_bps_hz,
                    "rate_ground": result.rate_ground_bps_hz,
                    "end_to_end": result.end_to_end_bps_hz,
                }
            )
            logger.info("throughput lambda=%g %s: %.3f bps/Hz", lam, label, result.end_to_end_bps_hz)
    _write(out_dir, "throughput.csv", rows)


# =========================
# 5. ASSOCIATION DELAY
# =========================


def delay_scenario():
    """Sparse constellation whose no-platform delay quantile sits at the target."""
    sparse = table1_scenario(mean_orbits=DELAY_MEAN_ORBITS, mean_sats_per_orbit=1.0, platform_enabled=False)
    mu = analysis.fit_density_for_delay_quantile(sparse, DELAY_TARGET_S, q=DELAY_QUANTILE)
    logger.info("fitted mu=%.4f for a %g s no-platform %g-quantile", mu, DELAY_TARGET_S, DELAY_QUANTILE)
    return sparse.updated(mean_sats_per_orbit=mu)


def association_delay(out_dir: Path) -> None:
    base = delay_scenario()
    mu = base.densities.mean_sats_per_orbit
    rows, quantiles = [], []
    for label, cfg in _variants(base, (20.0, 40.0)):
        for t in np.linspace(0.0, 1500.0, 31):
            rows.append({"case": label, "t_s": t, "value": analysis.delay_ccdf(cfg, t)})
        quantiles.append(
            {
                "case": label,
                "lambda": DELAY_MEAN_ORBITS,
                "mu": mu,
                "quantile": DELAY_QUANTILE,
                "delay_s": analysis.delay_quantile(cfg, DELAY_QUANTILE),
                "floor": analysis.delay_ccdf_asymptotic(cfg),
            }
        )
    _write(out_dir, "delay_ccdf.csv", rows)
    _write(out_dir, "delay_quantiles.csv", quantiles)


FIGURES = (
    snapshot,
    effective_satellites,
    connectivity_vs_density,
    connectivity_vs_altitude,
    snr_coverage,
    nearest_range,
    association_delay,
    throughput,
)


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    out_dir = Path(argv[0] if argv else "figures")
    out_dir.mkdir(parents=True, exist_ok=True)
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(levelname)s %(name)s: %(message)s")

    for figure in FIGURES:
        figure(out_dir)
    logger.info("all figure data written to %s", out_dir)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
