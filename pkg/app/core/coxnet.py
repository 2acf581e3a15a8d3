# app/core/coxnet.py
"""
Cox satellite point process: orbits from a Poisson line process on the
satellite sphere, satellites from independent Poisson processes on each orbit.

A ConstellationSample can carry many independent realizations at once
("trials"); orbits are stored trial-major and satellites orbit-major, so a
single snapshot is simply the n_trials == 1 case.
"""

import logging
import math
from dataclasses import dataclass, replace
from typing import List, Optional, Tuple

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field

from app.core import geometry
from app.schemas.scenario_schema import Densities, NetworkGeometry
from app.utils.errors import GeometryDomainError

logger = logging.getLogger(__name__)

TWO_PI = 2.0 * math.pi


class OrbitAngles(BaseModel):
    model_config = ConfigDict(frozen=True)

    theta: float = Field(ge=0.0, lt=math.pi)
    phi: float = Field(ge=0.0, lt=math.pi)


@dataclass(frozen=True)
class ConstellationSample:
    n_trials: int
    orbit_trial: np.ndarray
    theta: np.ndarray
    phi: np.ndarray
    sat_orbit: np.ndarray
    omega: np.ndarray
    epoch_s: float = 0.0
    # satellites were only drawn on orbits reaching this cap; None means all orbits
    thinning_cap: Optional[float] = None

    @property
    def n_orbits(self) -> int:
        return int(self.theta.size)

    @property
    def n_satellites(self) -> int:
        return int(self.omega.size)

    @property
    def sat_trial(self) -> np.ndarray:
        return self.orbit_trial[self.sat_orbit]

    @property
    def sat_phi(self) -> np.ndarray:
        return self.phi[self.sat_orbit]

    @property
    def orbits(self) -> List[OrbitAngles]:
        return [OrbitAngles(theta=float(t), phi=float(p)) for t, p in zip(self.theta, self.phi)]

    @property
    def arguments(self) -> List[np.ndarray]:
        """Satellite arguments grouped per orbit, in orbit order."""
        if self.n_orbits == 0:
            return []
        order = np.argsort(self.sat_orbit, kind="stable")
        bounds = np.cumsum(np.bincount(self.sat_orbit, minlength=self.n_orbits))[:-1]
        return np.split(self.omega[order], bounds)


def sample_constellation(
    densities: Densities,
    rng: np.random.Generator,
    n_trials: int = 1,
    thinning_cap: Optional[float] = None,
) -> ConstellationSample:
    """
    Draw n_trials independent realizations.

    - orbit count ~ Poisson(lambda); theta ~ U[0, pi); phi = arccos(1 - 2U)
    - satellites per orbit ~ Poisson(mu); omega ~ U[0, 2pi)
    - with thinning_cap, satellites are drawn only on orbits with
      sin(phi) >= cos(thinning_cap); no other orbit ever meets that cap
    """
    if n_trials < 1:
        raise ValueError("n_trials must be at least 1")
    orbit_counts = rng.poisson(densities.mean_orbits, size=n_trials)
    total_orbits = int(orbit_counts.sum())
    orbit_trial = np.repeat(np.arange(n_trials), orbit_counts)
    theta = rng.uniform(0.0, math.pi, size=total_orbits)
    phi = np.arccos(1.0 - 2.0 * rng.random(total_orbits))

    if thinning_cap is None:
        carrying = np.arange(total_orbits)
    else:
        carrying = np.flatnonzero(np.sin(phi) >= math.cos(thinning_cap))

    sat_counts = rng.poisson(densities.mean_sats_per_orbit, size=carrying.size)
    sat_orbit = np.repeat(carrying, sat_counts)
    omega = rng.uniform(0.0, TWO_PI, size=sat_orbit.size)

    logger.debug(
        "sampled %d trials: %d orbits, %d satellites", n_trials, total_orbits, sat_orbit.size
    )
    return ConstellationSample(
        n_trials=n_trials,
        orbit_trial=orbit_trial,
        theta=theta,
        phi=phi,
        sat_orbit=sat_orbit,
        omega=omega,
        thinning_cap=thinning_cap,
    )


def propagate(sample: ConstellationSample, geom: NetworkGeometry, t: float) -> ConstellationSample:
    """Advance every satellite by nu * t (t >= 0); orbits are fixed."""
    if not math.isfinite(t) or t < 0.0:
        raise GeometryDomainError(f"propagation time must be finite and non-negative, got {t!r}")
    omega = np.mod(sample.omega + geom.satellite_angular_speed_rad_s * t, TWO_PI)
    return replace(sample, omega=omega, epoch_s=sample.epoch_s + t)


def _check_cap(sample: ConstellationSample, cap_half_angle: float) -> None:
    if sample.thinning_cap is not None and cap_half_angle > sample.thinning_cap + 1e-15:
        raise GeometryDomainError(
            f"cap {cap_half_angle} wider than the thinning cap {sample.thinning_cap} of this sample"
        )


def in_cap_mask(sample: ConstellationSample, cap_half_angle) -> np.ndarray:
    """Per-satellite membership; cap_half_angle may be a per-trial array."""
    cap = np.asarray(cap_half_angle, dtype=float)
    if cap.ndim == 0:
        _check_cap(sample, float(cap))
        return geometry.in_extended_cap(sample.omega, sample.sat_phi, float(cap))
    _check_cap(sample, float(cap.max(initial=0.0)))
    return np.sin(sample.omega) * np.sin(sample.sat_phi) >= np.cos(cap[sample.sat_trial])


def satellites_in_cap(sample: ConstellationSample, cap_half_angle: float) -> List[Tuple[int, float]]:
    """(orbit index, argument) of every satellite inside the cap."""
    mask = in_cap_mask(sample, cap_half_angle)
    return [(int(o), float(w)) for o, w in zip(sample.sat_orbit[mask], sample.omega[mask])]


def count_effective_orbits(sample: ConstellationSample, cap_half_angle: float) -> np.ndarray:
    crossing = np.sin(sample.phi) >= math.cos(cap_half_angle)
    return np.bincount(sample.orbit_trial[crossing], minlength=sample.n_trials)


def count_in_cap(sample: ConstellationSample, cap_half_angle) -> np.ndarray:
    mask = in_cap_mask(sample, cap_half_angle)
    return np.bincount(sample.sat_trial[mask], minlength=sample.n_trials)


def nearest_distances(
    sample: ConstellationSample,
    geom: NetworkGeometry,
    apex_radius: float,
    cap_half_angle: float,
) -> np.ndarray:
    """Per-trial distance from (0,0,apex_radius) to the nearest in-cap satellite (inf if none)."""
    mask = in_cap_mask(sample, cap_half_angle)
    nearest = np.full(sample.n_trials, np.inf)
    distances = geometry.distance_from_axis_point(
        geom, apex_radius, sample.omega[mask], sample.sat_phi[mask]
    )
    np.minimum.at(nearest, sample.sat_trial[mask], distances)
    return nearest


def nearest_satellite_distance(
    sample: ConstellationSample,
    geom: NetworkGeometry,
    apex_radius: float,
    cap_half_angle: float,
) -> Optional[float]:
    if sample.n_trials != 1:
        raise ValueError("nearest_satellite_distance expects a single realization")
    nearest = float(nearest_distances(sample, geom, apex_radius, cap_half_angle)[0])
    return None if math.isinf(nearest) else nearest


def first_contact_times(
    sample: ConstellationSample, geom: NetworkGeometry, cap_half_angle: float
) -> np.ndarray:
    """
    Per-trial time until some satellite is inside the cap (0 if one already is,
    inf if no orbit ever reaches it). A satellite enters at omega_entry, so it
    waits ((omega_entry - omega) mod 2pi) / nu.
    """
    _check_cap(sample, cap_half_angle)
    phi = sample.sat_phi
    entry = geometry.cap_entry_argument(phi, cap_half_angle)
    inside = geometry.in_extended_cap(sample.omega, phi, cap_half_angle)
    with np.errstate(invalid="ignore"):
        wait = np.mod(entry - sample.omega, TWO_PI) / geom.satellite_angular_speed_rad_s
    wait = np.where(inside, 0.0, np.where(np.isnan(entry), np.inf, wait))
    first = np.full(sample.n_trials, np.inf)
    np.minimum.at(first, sample.sat_trial, wait)
    return first


def time_to_first_contact(
    sample: ConstellationSample, geom: NetworkGeometry, cap_half_angle: float
) -> float:
    if sample.n_trials != 1:
        raise ValueError("time_to_first_contact expects a single realization")
    return float(first_contact_times(sample, geom, cap_half_angle)[0])


def elevation_visible(
    sample: ConstellationSample, geom: NetworkGeometry, kappa: float
) -> np.ndarray:
    """Per-trial indicator of a satellite at elevation >= kappa above the gateway."""
    elevation = geometry.elevation_angle(geom, sample.omega, sample.sat_phi)
    visible = elevation >= kappa
    return np.bincount(sample.sat_trial[visible], minlength=sample.n_trials) > 0


def snapshot_frame(
    sample: ConstellationSample,
    geom: NetworkGeometry,
    ground_node_count: Optional[int] = None,
) -> pd.DataFrame:
    """One row per satellite; orbits without satellites are omitted."""
    if sample.n_trials != 1:
        raise ValueError("snapshot_frame expects a single realization")
    orbit = sample.sat_orbit
    xyz = geometry.satellite_cartesian(geom, sample.theta[orbit], sample.phi[orbit], sample.omega)
    frame = pd.DataFrame(
        {
            "orbit_id": orbit,
            "theta_rad": sample.theta[orbit],
            "phi_rad": sample.phi[orbit],
            "omega_rad": sample.omega,
            "x_km": xyz[:, 0],
            "y_km": xyz[:, 1],
            "z_km": xyz[:, 2],
        }
    )
    frame["epoch_s"] = sample.epoch_s
    frame["ground_node_count"] = "" if ground_node_count is None else ground_node_count
    return frame.sort_values(["orbit_id", "omega_rad"], kind="stable").reset_index(drop=True)
