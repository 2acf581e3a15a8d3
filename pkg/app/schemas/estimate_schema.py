# app/schemas/estimate_schema.py
import math
from typing import Literal, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, model_validator

MetricId = Literal[
    "effective-orbits",
    "effective-satellites",
    "gain-factors",
    "connectivity",
    "connectivity-gain",
    "range-ccdf",
    "snr-coverage",
    "snr-coverage-ground",
    "rate-platform",
    "rate-ground",
    "throughput",
    "delay-ccdf",
    "delay-floor",
    "propagation-delay",
    "connectivity-zenith",
    "connectivity-elevation",
]

# metric -> name of the grid parameter it is evaluated over
GRID_PARAMETERS = {
    "range-ccdf": "d_km",
    "snr-coverage": "tau",
    "snr-coverage-ground": "tau",
    "delay-ccdf": "t_s",
}


class MetricSpec(BaseModel):
    """
    What to evaluate or estimate.
    - grid: distances (km), linear SNR thresholds or times (s) for grid metrics
    - kappa_rad: minimum elevation for connectivity-elevation
    - zenith_max_rad: upper end of the uniform zenith law for connectivity-zenith
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    metric_id: MetricId
    grid: Tuple[float, ...] = ()
    kappa_rad: float = Field(default=0.0, ge=0.0, lt=math.pi / 2)
    zenith_max_rad: float = Field(default=math.pi / 6, gt=0.0, lt=math.pi / 2)

    @model_validator(mode="after")
    def _check_grid(self) -> "MetricSpec":
        if self.metric_id in GRID_PARAMETERS:
            if not self.grid:
                raise ValueError(f"metric {self.metric_id} needs a nonempty {GRID_PARAMETERS[self.metric_id]} grid")
            if any(not math.isfinite(g) or g < 0 for g in self.grid):
                raise ValueError("grid values must be finite and non-negative")
        elif self.grid:
            raise ValueError(f"metric {self.metric_id} takes no grid")
        return self

    @property
    def grid_parameter(self) -> Optional[str]:
        return GRID_PARAMETERS.get(self.metric_id)


class MetricEstimate(BaseModel):
    model_config = ConfigDict(frozen=True)

    metric_id: str
    param: Optional[float] = None
    mean: float
    stderr: float = Field(ge=0.0)
    n_trials: int = Field(ge=1)
    seed: int
    # share of trials meeting a condition (binomial stderr)
    proportion: bool = False


class ValidationRow(BaseModel):
    model_config = ConfigDict(frozen=True)

    metric_id: str
    param_point: str
    analytical: float
    mc_mean: float
    mc_stderr: float
    z_score: float

    def flagged(self, threshold: float = 3.0) -> bool:
        return not self.z_score <= threshold


class MetricValue(BaseModel):
    """One analytical output: label is the metric id, or metric:component for multi-valued metrics."""

    model_config = ConfigDict(frozen=True)

    label: str
    param_name: Optional[str] = None
    param: Optional[float] = None
    value: float
    error: float = 0.0
