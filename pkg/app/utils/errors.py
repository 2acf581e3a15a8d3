# app/utils/errors.py


class CoxSatError(Exception):
    """Base class for every error raised by the coxsat package."""


class GeometryDomainError(CoxSatError, ValueError):
    """A trigonometric argument left its domain by more than roundoff."""


class SeriesConvergenceError(CoxSatError, ArithmeticError):
    """A truncated series hit its term cap before reaching tolerance."""


class QuadratureError(CoxSatError, ArithmeticError):
    """Numerical integration failed (non-convergence or non-finite integrand)."""


class ScenarioError(CoxSatError, ValueError):
    """A scenario file or scenario parameter is invalid."""


class MetricSpecError(CoxSatError, ValueError):
    """Unknown metric id or a metric requested with missing parameters."""


class QuadratureAccuracyWarning(UserWarning):
    pass


class SmallSampleWarning(UserWarning):
    pass
