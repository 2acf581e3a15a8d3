# app/core/quadrature.py
"""
Numerical integration engine for the nested coverage integrals.

- regular integrands: adaptive Gauss-Kronrod (QUADPACK via scipy.integrate.quad)
- integrable endpoint singularities: tanh-sinh (double exponential) rule with
  level halving; the integrand may take a second argument, the distance to the
  nearest endpoint, so that points closer than one ulp to b stay distinguishable
- [0, inf): the substitution u = x / (1 - x) with an adaptive truncation point
"""

import functools
import logging
import math
import warnings
from typing import Callable, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy import integrate as sp_integrate

from app.utils.errors import QuadratureAccuracyWarning, QuadratureError

logger = logging.getLogger(__name__)

MEMO_QUANTUM = 1e-12

# tanh-sinh: t in [-T, T]; at T=4 the weights are below 1e-30 even against
# a 1/sqrt endpoint singularity.
_TS_T_MAX = 4.0
_TS_MIN_LEVEL = 3
_TS_MAX_LEVEL = 12

_SEMI_INFINITE_MAX_DOUBLINGS = 40


class QuadratureSettings(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    rel_tol: float = Field(default=1e-8, gt=0)
    abs_tol: float = Field(default=1e-12, gt=0)
    max_subdivisions: int = Field(default=2000, ge=1)
    singular_endpoint_scheme: Literal["none", "double_exponential"] = "none"

    def with_scheme(self, scheme: str) -> "QuadratureSettings":
        return self.model_copy(update={"singular_endpoint_scheme": scheme})


DEFAULT_SETTINGS = QuadratureSettings()
SINGULAR_SETTINGS = QuadratureSettings(singular_endpoint_scheme="double_exponential")


def _tolerance(settings: QuadratureSettings, value: float) -> float:
    return max(settings.rel_tol * abs(value), settings.abs_tol)


def _guarded(f: Callable[[float], float]) -> Callable[[float], float]:
    def wrapper(x: float) -> float:
        y = f(x)
        if not math.isfinite(y):
            raise QuadratureError(f"integrand is not finite at x={x!r} (value {y!r})")
        return y

    return wrapper


def integrate(
    f: Callable,
    a: float,
    b: float,
    settings: QuadratureSettings = DEFAULT_SETTINGS,
    points: Optional[Sequence[float]] = None,
    endpoint_distance: bool = False,
) -> Tuple[float, float]:
    """
    Integrate f over [a, b] and return (value, error_estimate).

    With the double_exponential scheme f must accept numpy arrays; when
    endpoint_distance is set it is called as f(x, xc) with xc = a - x on the
    left half of the interval and xc = b - x on the right half.
    """
    if not (math.isfinite(a) and math.isfinite(b)):
        raise QuadratureError("integrate needs finite limits; use integrate_semi_infinite")
    if a > b:
        raise QuadratureError(f"lower limit {a} exceeds upper limit {b}")
    if a == b:
        return 0.0, 0.0

    if settings.singular_endpoint_scheme == "double_exponential":
        value, error = _tanh_sinh(f, a, b, settings, endpoint_distance)
    else:
        if endpoint_distance:
            raise QuadratureError("endpoint_distance integrands need the double_exponential scheme")
        value, error = _adaptive_gauss_kronrod(f, a, b, settings, points)

    if error > _tolerance(settings, value):
        message = f"quadrature error estimate {error:.3e} exceeds tolerance on [{a}, {b}] (value {value:.12g})"
        logger.warning(message)
        warnings.warn(message, QuadratureAccuracyWarning, stacklevel=2)
    return value, error


def _adaptive_gauss_kronrod(f, a, b, settings, points):
    inner_points = None
    if points:
        inner_points = sorted(p for p in points if a < p < b) or None

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", sp_integrate.IntegrationWarning)
        result = sp_integrate.quad(
            _guarded(f),
            a,
            b,
            epsabs=settings.abs_tol,
            epsrel=settings.rel_tol,
            limit=settings.max_subdivisions,
            points=inner_points,
            full_output=1,
        )
    value, error, info = result[0], result[1], result[2]
    if len(result) > 3 and "maximum number of subdivisions" in str(result[3]):
        raise QuadratureError(
            f"no convergence after {settings.max_subdivisions} subdivisions on [{a}, {b}]: {result[3]}"
        )
    if not math.isfinite(value):
        raise QuadratureError(f"quadrature produced a non-finite value on [{a}, {b}]")
    logger.debug("gauss-kronrod on [%g, %g]: %d evaluations", a, b, info.get("neval", -1))
    return float(value), float(error)


@functools.lru_cache(maxsize=None)
def _tanh_sinh_level(level: int) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Nodes added at one level (all nodes at level 0, odd multiples of h after).
    Returns (u, complement, weight) with u in (-1, 1), complement = 1 - |u|
    computed without cancellation, and the weight dx/dt on [-1, 1].
    """
    h = 2.0 ** (-level)
    count = int(round(_TS_T_MAX / h))
    if level == 0:
        k = np.arange(-count, count + 1)
    else:
        k = np.arange(-count + 1, count, 2)
    t = k * h
    s = 0.5 * math.pi * np.sinh(t)
    u = np.tanh(s)
    complement = 2.0 / (1.0 + np.exp(2.0 * np.abs(s)))
    weight = 0.5 * math.pi * np.cosh(t) / np.cosh(s) ** 2
    return u, complement, weight


def _tanh_sinh(f, a, b, settings, endpoint_distance):
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    # points this close to an endpoint are part of the singular tail and may be dropped
    endpoint_slack = 64.0 * np.finfo(float).eps * max(abs(a), abs(b), half)

    def level_sum(level: int) -> float:
        u, complement, weight = _tanh_sinh_level(level)
        x = mid + half * u
        xc = np.where(u < 0, -half * complement, half * complement)
        values = np.asarray(f(x, xc) if endpoint_distance else f(x), dtype=float)
        values = np.broadcast_to(values, x.shape)
        finite = np.isfinite(values)
        if not np.all(finite):
            bad = ~finite & (np.abs(xc) > endpoint_slack)
            if np.any(bad):
                raise QuadratureError(f"integrand is not finite at interior x={x[bad][0]!r}")
        return float(np.sum(np.where(finite, values * weight, 0.0)))

    running = level_sum(0)
    estimate = half * running
    error = math.inf
    for level in range(1, _TS_MAX_LEVEL + 1):
        running += level_sum(level)
        h = 2.0 ** (-level)
        new_estimate = half * h * running
        error = abs(new_estimate - estimate)
        estimate = new_estimate
        if level >= _TS_MIN_LEVEL and error <= _tolerance(settings, estimate):
            logger.debug("tanh-sinh on [%g, %g] converged at level %d", a, b, level)
            return estimate, error
    return estimate, error


def integrate_semi_infinite(
    f: Callable[[float], float],
    settings: QuadratureSettings = DEFAULT_SETTINGS,
    breakpoints: Optional[Sequence[float]] = None,
) -> Tuple[float, float]:
    """
    Integrate a nonnegative, eventually nonincreasing f over [0, inf).

    The tail is truncated at the first U in 1, 2, 4, ... with f(U) < abs_tol;
    [0, U] is then mapped onto [0, U/(1+U)] by u = x / (1 - x).
    breakpoints are u-locations of known discontinuities.
    """
    upper = 1.0
    for _ in range(_SEMI_INFINITE_MAX_DOUBLINGS):
        if f(upper) < settings.abs_tol:
            break
        upper *= 2.0
    else:
        raise QuadratureError("integrand does not decay; cannot truncate [0, inf)")

    x_upper = upper / (1.0 + upper)

    def mapped(x: float) -> float:
        one_minus = 1.0 - x
        return f(x / one_minus) / (one_minus * one_minus)

    x_points = None
    if breakpoints:
        x_points = [p / (1.0 + p) for p in breakpoints if 0.0 < p < upper]

    return integrate(mapped, 0.0, x_upper, settings.with_scheme("none"), points=x_points)


def memoize_quantized(quantum: float = MEMO_QUANTUM, maxsize: Optional[int] = 1 << 16):
    """
    Cache f(x, *params) on (round(x / quantum), params). The function is always
    evaluated at the quantized abscissa, so cached and fresh calls agree exactly
    regardless of call order. lru_cache keeps the table consistent across threads.
    """

    def decorator(func):
        @functools.lru_cache(maxsize=maxsize)
        def _cached(key: int, params: tuple):
            return func(key * quantum, *params)

        @functools.wraps(func)
        def wrapper(x: float, *params):
            return _cached(int(round(x / quantum)), params)

        wrapper.cache_info = _cached.cache_info
        wrapper.cache_clear = _cached.cache_clear
        wrapper.uncached = func
        return wrapper

    return decorator
