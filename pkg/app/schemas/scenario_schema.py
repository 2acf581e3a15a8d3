# app/schemas/scenario_schema.py
import math
from typing import Annotated, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, model_validator

from app.core.fading import NakagamiPower, NoFading, ShadowedRice
from app.utils.helpers import db_to_linear

EARTH_RADIUS_KM = 6371.0
# path loss is defined for D >= 1 m only
MIN_PATH_M = 1.0

FadingModel = Annotated[
    Union[NakagamiPower, ShadowedRice, NoFading],
    Field(discriminator="kind"),
]


class NetworkGeometry(BaseModel):
    """
    Radii (km, measured from the Earth's centre) and satellite angular speed.
    r_a == r_e is accepted and models a platform at ground level.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    earth_radius_km: float = EARTH_RADIUS_KM
    satellite_orbit_radius_km: float
    platform_orbit_radius_km: float
    satellite_angular_speed_rad_s: float = 0.0011

    @model_validator(mode="after")
    def _check_ordering(self) -> "NetworkGeometry":
        r_e = self.earth_radius_km
        r_a = self.platform_orbit_radius_km
        r_s = self.satellite_orbit_radius_km
        if not (0 < r_e <= r_a < r_s):
            raise ValueError(f"radii must satisfy r_e <= r_a < r_s, got r_e={r_e}, r_a={r_a}, r_s={r_s}")
        if not self.satellite_angular_speed_rad_s > 0:
            raise ValueError("satellite_angular_speed_rad_s must be positive")
        phi_bar = math.acos(r_e / r_a) + math.acos(r_e / r_s)
        if phi_bar > math.pi / 2:
            raise ValueError(
                f"extended cap half-angle {phi_bar:.6f} rad exceeds pi/2; "
                "only sub-hemisphere caps are supported"
            )
        return self

    @classmethod
    def from_radii(
        cls,
        satellite_orbit_radius_km: float,
        platform_orbit_radius_km: float,
        earth_radius_km: float = EARTH_RADIUS_KM,
        satellite_angular_speed_rad_s: float = 0.0011,
    ) -> "NetworkGeometry":
        return cls(
            earth_radius_km=earth_radius_km,
            satellite_orbit_radius_km=satellite_orbit_radius_km,
            platform_orbit_radius_km=platform_orbit_radius_km,
            satellite_angular_speed_rad_s=satellite_angular_speed_rad_s,
        )

    @classmethod
    def from_altitudes(
        cls,
        satellite_altitude_km: float,
        platform_altitude_km: float,
        earth_radius_km: float = EARTH_RADIUS_KM,
        satellite_angular_speed_rad_s: float = 0.0011,
    ) -> "NetworkGeometry":
        return cls.from_radii(
            satellite_orbit_radius_km=earth_radius_km + satellite_altitude_km,
            platform_orbit_radius_km=earth_radius_km + platform_altitude_km,
            earth_radius_km=earth_radius_km,
            satellite_angular_speed_rad_s=satellite_angular_speed_rad_s,
        )

    @property
    def platform_altitude_km(self) -> float:
        return self.platform_orbit_radius_km - self.earth_radius_km

    @property
    def satellite_altitude_km(self) -> float:
        return self.satellite_orbit_radius_km - self.earth_radius_km


class Densities(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    # zero is accepted so that the degenerate (empty) process can be evaluated
    mean_orbits: float = Field(ge=0, allow_inf_nan=False)
    mean_sats_per_orbit: float = Field(ge=0, allow_inf_nan=False)


def _path_metres(distance_km):
    return np.maximum(1000.0 * np.asarray(distance_km, dtype=float), MIN_PATH_M)


class LinkBudget(BaseModel):
    """
    One hop of the downlink. Inputs are in dB units, the SNR scale eta is
    converted to linear exactly once, here.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    rx_power_at_1m_dbm: float = 30.0
    aggregate_gain_db: float = 26.0
    bandwidth_hz: float = Field(default=10e6, gt=0)
    noise_density_dbm_hz: float = -174.0
    path_loss_exponent: float = Field(default=2.0, ge=2.0)

    _eta: float = PrivateAttr(default=0.0)

    def model_post_init(self, __context) -> None:
        noise_mw = db_to_linear(self.noise_density_dbm_hz) * self.bandwidth_hz
        self._eta = db_to_linear(self.rx_power_at_1m_dbm) * db_to_linear(self.aggregate_gain_db) / noise_mw

    @property
    def eta(self) -> float:
        return self._eta

    def path_gain(self, distance_km):
        """eta * D^-alpha with D converted from km to metres and floored at 1 m."""
        return self._eta * _path_metres(distance_km) ** (-self.path_loss_exponent)

    def normalized_threshold(self, tau, distance_km):
        """Fading level H must exceed this for SNR >= tau at the given distance."""
        return tau * _path_metres(distance_km) ** self.path_loss_exponent / self._eta


class ScenarioConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    geom: NetworkGeometry
    densities: Densities
    platform_enabled: bool = True
    sat_link: LinkBudget = LinkBudget()
    platform_link: LinkBudget = LinkBudget()
    fading: FadingModel = NakagamiPower(m=1.0, omega=1.0)
    ground_node_count: Optional[int] = Field(default=None, ge=0)

    @property
    def apex_radius_km(self) -> float:
        """Distance from the origin of the receiving node (platform or gateway)."""
        if self.platform_enabled:
            return self.geom.platform_orbit_radius_km
        return self.geom.earth_radius_km

    def updated(
        self,
        mean_orbits: Optional[float] = None,
        mean_sats_per_orbit: Optional[float] = None,
        platform_altitude_km: Optional[float] = None,
        platform_enabled: Optional[bool] = None,
    ) -> "ScenarioConfig":
        """Copy with sweep parameters replaced; nested models are re-validated."""
        densities = Densities(
            mean_orbits=self.densities.mean_orbits if mean_orbits is None else mean_orbits,
            mean_sats_per_orbit=(
                self.densities.mean_sats_per_orbit if mean_sats_per_orbit is None else mean_sats_per_orbit
            ),
        )
        geom = self.geom
        if platform_altitude_km is not None:
            geom = NetworkGeometry.from_radii(
                satellite_orbit_radius_km=geom.satellite_orbit_radius_km,
                platform_orbit_radius_km=geom.earth_radius_km + platform_altitude_km,
                earth_radius_km=geom.earth_radius_km,
                satellite_angular_speed_rad_s=geom.satellite_angular_speed_rad_s,
            )
        return self.model_copy(
            update={
                "densities": densities,
                "geom": geom,
                "platform_enabled": self.platform_enabled if platform_enabled is None else platform_enabled,
            }
        )
