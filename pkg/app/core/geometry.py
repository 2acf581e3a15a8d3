# app/core/geometry.py
"""
Spherical geometry shared by the analytical and the simulation paths.

Conventions: all angles in radians, all lengths in km from the Earth's centre.
The typical gateway sits at U=(0,0,r_e) and its platform at A=(0,0,r_a), so every
cap is centred on the positive z-axis. A satellite with argument omega on an orbit
of inclination phi has height r_s * sin(omega) * sin(phi), hence lies in the cap of
half-angle c iff sin(omega) sin(phi) >= cos(c).
"""

import math

import numpy as np

from app.schemas.scenario_schema import NetworkGeometry
from app.utils.errors import GeometryDomainError
from app.utils.validators import DOMAIN_TOLERANCE, clamp_nonnegative, clamp_unit_interval

HALF_PI = 0.5 * math.pi


def visible_cap_angle(geom: NetworkGeometry) -> float:
    """xi_bar: half-angle of the cap visible from the ground node."""
    return math.acos(geom.earth_radius_km / geom.satellite_orbit_radius_km)


def extended_cap_angle(geom: NetworkGeometry) -> float:
    """phi_bar: half-angle of the cap visible from the platform at r_a."""
    phi_bar = math.acos(geom.earth_radius_km / geom.platform_orbit_radius_km) + visible_cap_angle(geom)
    if phi_bar > HALF_PI:
        raise GeometryDomainError(f"extended cap half-angle {phi_bar} exceeds pi/2")
    return phi_bar


def cap_chord(geom: NetworkGeometry, apex_radius: float, cap_half_angle: float) -> float:
    """Distance from the apex point to the rim of the cap, e.g. |AC| for phi_bar."""
    r_s = geom.satellite_orbit_radius_km
    return math.sqrt(apex_radius ** 2 + r_s ** 2 - 2.0 * apex_radius * r_s * math.cos(cap_half_angle))


def critical_inclination(geom: NetworkGeometry, apex_radius: float, d: float) -> float:
    """
    zeta(d): opening angle of the cap S_{X,d} of satellite-sphere points within
    distance d of X=(0,0,apex_radius). Orbits with |pi/2 - phi| < zeta(d) cross it.
    """
    r_s = geom.satellite_orbit_radius_km
    lower, upper = r_s - apex_radius, r_s + apex_radius
    slack = DOMAIN_TOLERANCE * r_s
    if d < lower - slack or d > upper + slack:
        raise GeometryDomainError(f"d={d} outside admissible range [{lower}, {upper}]")
    cosine = (apex_radius ** 2 + r_s ** 2 - d * d) / (2.0 * r_s * apex_radius)
    return math.acos(clamp_unit_interval(cosine, "critical-angle cosine"))


def cap_arc_half_angle(zeta: float, inclination: float) -> float:
    """
    Half of the central angle of the arc an orbit of the given inclination
    spends inside a cap of half-angle zeta: arcsin(sqrt(1 - cos^2 zeta csc^2 phi)).
    """
    sin_phi = math.sin(inclination)
    if sin_phi == 0.0:
        raise GeometryDomainError("inclination 0 never crosses a sub-hemisphere cap")
    radicand = 1.0 - (math.cos(zeta) / sin_phi) ** 2
    if radicand < 0.0 and abs(radicand) <= DOMAIN_TOLERANCE:
        return 0.0
    radicand = clamp_nonnegative(radicand, "arc radicand")
    return math.asin(min(1.0, math.sqrt(radicand)))


def arc_radicand_complement(zeta, v):
    """
    1 - cos^2(zeta) sec^2(v) written as sin(zeta-v) sin(zeta+v) / cos^2(v).
    v is the complement inclination pi/2 - phi. The product form stays accurate
    as v -> zeta, where the integrands of the coverage formulas are singular.
    Values outside [0, zeta] are clipped to 0.
    """
    v = np.asarray(v, dtype=float)
    radicand = np.sin(zeta - v) * np.sin(zeta + v) / np.cos(v) ** 2
    return np.clip(radicand, 0.0, 1.0)


def arc_half_angle_complement(zeta, v):
    """Vectorized cap_arc_half_angle in the complement variable v = pi/2 - phi."""
    return np.arcsin(np.sqrt(arc_radicand_complement(zeta, v)))


def distance_from_axis_point(geom: NetworkGeometry, axis_height, omega, inclination):
    """|ZX| for Z=(0,0,axis_height) and a satellite with argument omega on inclination phi."""
    if np.any(np.asarray(axis_height) < 0):
        raise GeometryDomainError("axis_height must be non-negative")
    r_s = geom.satellite_orbit_radius_km
    squared = r_s ** 2 - 2.0 * r_s * axis_height * np.sin(omega) * np.sin(inclination) + np.square(axis_height)
    return np.sqrt(np.maximum(squared, 0.0))


def satellite_cartesian(geom: NetworkGeometry, theta, inclination, omega):
    """
    (x, y, z) of a satellite. The longitude offset theta_tilde uses the two-argument
    arctangent of (sin w cos phi, cos w) so the point moves continuously over [0, 2pi).
    """
    r_s = geom.satellite_orbit_radius_km
    theta = np.asarray(theta, dtype=float)
    inclination = np.asarray(inclination, dtype=float)
    omega = np.asarray(omega, dtype=float)
    theta_tilde = np.arctan2(np.sin(omega) * np.cos(inclination), np.cos(omega))
    rho = r_s * np.sqrt(np.cos(omega) ** 2 + np.sin(omega) ** 2 * np.cos(inclination) ** 2)
    x = rho * np.cos(theta + theta_tilde)
    y = rho * np.sin(theta + theta_tilde)
    z = r_s * np.sin(omega) * np.sin(inclination)
    return np.stack([x, y, z], axis=-1)


def in_extended_cap(omega, inclination, cap_half_angle: float):
    """Membership in the z-axis cap of the given half-angle."""
    if not 0.0 <= cap_half_angle <= HALF_PI:
        raise GeometryDomainError(f"cap_half_angle {cap_half_angle} outside [0, pi/2]")
    return np.sin(omega) * np.sin(inclination) >= math.cos(cap_half_angle)


def cap_entry_argument(inclination, cap_half_angle: float):
    """
    omega_entry = arcsin(cos(c) / sin(phi)). The in-cap argument arc is
    [omega_entry, pi - omega_entry]; NaN where the orbit never reaches the cap.
    """
    sin_phi = np.sin(np.asarray(inclination, dtype=float))
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = math.cos(cap_half_angle) / sin_phi
    return np.where(ratio <= 1.0, np.arcsin(np.minimum(ratio, 1.0)), np.nan)


def elevation_angle(geom: NetworkGeometry, omega, inclination):
    """Elevation of a satellite above the local horizon of the ground node U."""
    r_e = geom.earth_radius_km
    height = geom.satellite_orbit_radius_km * np.sin(omega) * np.sin(inclination)
    slant = distance_from_axis_point(geom, r_e, omega, inclination)
    return np.arcsin(np.clip((height - r_e) / slant, -1.0, 1.0))


def min_elevation_cap_angle(geom: NetworkGeometry, kappa: float) -> float:
    """
    xi_tilde: half-angle of the cap of satellites seen above elevation kappa.
    The slant range y solves y^2 + 2 r_e sin(k) y + r_e^2 - r_s^2 = 0 (positive root).
    """
    if not 0.0 <= kappa < HALF_PI:
        raise GeometryDomainError(f"kappa {kappa} outside [0, pi/2)")
    r_e, r_s = geom.earth_radius_km, geom.satellite_orbit_radius_km
    slant = -r_e * math.sin(kappa) + math.sqrt(r_s ** 2 - (r_e * math.cos(kappa)) ** 2)
    cosine = (r_e ** 2 + r_s ** 2 - slant ** 2) / (2.0 * r_s * r_e)
    return math.acos(clamp_unit_interval(cosine))


def zenith_platform_radius(geom: NetworkGeometry, zenith):
    """r_l: distance from the origin of a platform seen at zenith angle Z from the gateway."""
    h_a = geom.platform_altitude_km
    return np.sqrt(geom.platform_orbit_radius_km ** 2 + (h_a * np.tan(zenith)) ** 2)


def zenith_cap_angle(geom: NetworkGeometry, zenith) -> np.ndarray:
    """phi_hat = arccos(r_e / r_l) + arccos(r_e / r_s)."""
    r_l = zenith_platform_radius(geom, zenith)
    phi_hat = np.arccos(geom.earth_radius_km / r_l) + visible_cap_angle(geom)
    if np.any(phi_hat > HALF_PI):
        raise GeometryDomainError("zenith angle support produces a cap wider than pi/2")
    return phi_hat
