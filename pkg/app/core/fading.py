# app/core/fading.py
"""
Small-scale fading models.

Every model exposes the CCDF F_H(x) = P(H >= x) that the coverage formulas
consume, the CDF, and a sampler for the Monte Carlo estimators.

The Nakagami model follows the power-domain density

    f_H(x) = x^(m-1) exp(-x / (m/omega)) / (Gamma(m) (m/omega)^m),

i.e. a gamma law with shape m and scale m/omega (mean m^2/omega). The usual
"mean power omega" convention is available through NakagamiPower.from_mean_power.
"""

import logging
from typing import List, Literal

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy import special

from app.utils.errors import SeriesConvergenceError

logger = logging.getLogger(__name__)

SERIES_REL_TOL = 1e-12
SERIES_MAX_TERMS = 10_000
_SERIES_CHUNK = 64


def _as_output(values: np.ndarray, like):
    if np.ndim(like) == 0:
        return float(values.reshape(-1)[0])
    return values


class NakagamiPower(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["nakagami"] = "nakagami"
    m: float = Field(default=1.0, gt=0, allow_inf_nan=False)
    omega: float = Field(default=1.0, gt=0, allow_inf_nan=False)

    @classmethod
    def from_mean_power(cls, m: float, mean_power: float) -> "NakagamiPower":
        """Conventional parameterization: gamma power with shape m and mean mean_power."""
        return cls(m=m, omega=m * m / mean_power)

    @property
    def scale(self) -> float:
        return self.m / self.omega

    def ccdf(self, x):
        x_arr = np.maximum(np.asarray(x, dtype=float), 0.0)
        return _as_output(np.asarray(special.gammaincc(self.m, x_arr / self.scale)), x)

    def cdf(self, x):
        x_arr = np.maximum(np.asarray(x, dtype=float), 0.0)
        return _as_output(np.asarray(special.gammainc(self.m, x_arr / self.scale)), x)

    def sample(self, rng: np.random.Generator, size=None):
        return rng.gamma(self.m, self.scale, size=size)

    def jump_points(self) -> List[float]:
        return []


class ShadowedRice(BaseModel):
    """
    Shadowed-Rician power: a LOS component whose amplitude is Nakagami-m_tilde
    shadowed (average power omega_tilde) plus diffuse scattering of average power 2b.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["shadowed_rice"] = "shadowed_rice"
    b: float = Field(gt=0, allow_inf_nan=False)
    m_tilde: float = Field(gt=0, allow_inf_nan=False)
    omega_tilde: float = Field(ge=0, allow_inf_nan=False)

    def cdf(self, x):
        return shadowed_rice_cdf(self.b, self.m_tilde, self.omega_tilde, x)

    def ccdf(self, x):
        values = 1.0 - np.asarray(shadowed_rice_cdf(self.b, self.m_tilde, self.omega_tilde, np.atleast_1d(x)))
        return _as_output(np.clip(values, 0.0, 1.0), x)

    def sample(self, rng: np.random.Generator, size=None):
        # LOS amplitude^2 ~ Gamma(m_tilde, omega_tilde/m_tilde); diffuse part CN(0, 2b).
        if self.omega_tilde > 0:
            los_power = rng.gamma(self.m_tilde, self.omega_tilde / self.m_tilde, size=size)
        else:
            los_power = np.zeros(size) if size is not None else 0.0
        phase = rng.uniform(0.0, 2.0 * np.pi, size=size)
        sigma = np.sqrt(self.b)
        real = np.sqrt(los_power) * np.cos(phase) + sigma * rng.standard_normal(size=size)
        imag = np.sqrt(los_power) * np.sin(phase) + sigma * rng.standard_normal(size=size)
        return real * real + imag * imag

    def jump_points(self) -> List[float]:
        return []


class NoFading(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["none"] = "none"

    def ccdf(self, x):
        x_arr = np.asarray(x, dtype=float)
        return _as_output(np.where(x_arr <= 1.0, 1.0, 0.0), x)

    def cdf(self, x):
        x_arr = np.asarray(x, dtype=float)
        return _as_output(np.where(x_arr < 1.0, 0.0, 1.0), x)

    def sample(self, rng: np.random.Generator, size=None):
        if size is None:
            return 1.0
        return np.ones(size)

    def jump_points(self) -> List[float]:
        """Fading levels where the CCDF is discontinuous."""
        return [1.0]


def shadowed_rice_cdf(b: float, m_tilde: float, omega_tilde: float, x):
    """
    CDF of the shadowed-Rician power by its Pochhammer series

        F(x) = K * sum_n (m~)_n d^n (2b)^(1+n) / (n!)^2 * gamma(1+n, x/2b),
        K = (2b m~ / (2b m~ + W~))^m~ / (2b),  d = (W~ / (2b m~ + W~)) / 2b.

    Written with a = d*2b, the n-th term is (1-a)^m~ (m~)_n a^n / n! * P(n+1, x/2b),
    with P the regularized lower incomplete gamma function. Terms are summed in chunks
    until, past the coefficient mode, the last term is below SERIES_REL_TOL of the sum.
    """
    x_arr = np.atleast_1d(np.maximum(np.asarray(x, dtype=float), 0.0))
    y = x_arr / (2.0 * b)
    a = omega_tilde / (2.0 * b * m_tilde + omega_tilde)
    if a == 0.0:
        return _as_output(-np.expm1(-y), x)

    log_scale = m_tilde * np.log1p(-a)
    mode = max(0.0, (m_tilde * a - 1.0) / (1.0 - a))
    total = np.zeros_like(y)
    for start in range(0, SERIES_MAX_TERMS, _SERIES_CHUNK):
        n = np.arange(start, start + _SERIES_CHUNK, dtype=float)
        log_coef = (
            special.gammaln(m_tilde + n) - special.gammaln(m_tilde)
            + n * np.log(a) - special.gammaln(n + 1.0) + log_scale
        )
        terms = np.exp(log_coef)[None, :] * special.gammainc(n[None, :] + 1.0, y[:, None])
        total += terms.sum(axis=1)
        if n[-1] > mode and np.all(terms[:, -1] <= SERIES_REL_TOL * total):
            logger.debug("shadowed-Rice series converged after %d terms", start + _SERIES_CHUNK)
            return _as_output(np.minimum(total, 1.0), x)

    raise SeriesConvergenceError(
        f"shadowed-Rice series did not converge within {SERIES_MAX_TERMS} terms "
        f"(b={b}, m_tilde={m_tilde}, omega_tilde={omega_tilde})"
    )


def ccdf(model, x):
    return model.ccdf(x)


def sample(model, rng: np.random.Generator, size=None):
    return model.sample(rng, size=size)
