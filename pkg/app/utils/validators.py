# app/utils/validators.py
import math

from app.utils.errors import GeometryDomainError, ScenarioError

# Arguments within this distance of a domain edge are roundoff, beyond it a caller bug.
DOMAIN_TOLERANCE = 1e-12


def ensure_nonnegative(value: float, field: str) -> float:
    if not math.isfinite(value) or value < 0:
        raise ScenarioError(f"{field} must be non-negative and finite, got {value!r}")
    return value


def ensure_probability(value: float, field: str) -> float:
    if not 0.0 <= value <= 1.0:
        raise ScenarioError(f"{field} must lie in [0, 1], got {value!r}")
    return value


def clamp_unit_interval(value: float, field: str = "cosine argument") -> float:
    """
    Clamp a cosine/sine argument to [-1, 1].
    Values outside by at most DOMAIN_TOLERANCE (relative) are clamped,
    anything further out raises GeometryDomainError.
    """
    if -1.0 <= value <= 1.0:
        return value
    if abs(value) - 1.0 <= DOMAIN_TOLERANCE * max(1.0, abs(value)):
        return math.copysign(1.0, value)
    raise GeometryDomainError(f"{field} {value!r} is outside [-1, 1]")


def clamp_nonnegative(value: float, field: str = "square-root argument") -> float:
    if value >= 0.0:
        return value
    if value >= -DOMAIN_TOLERANCE:
        return 0.0
    raise GeometryDomainError(f"{field} {value!r} is negative")
