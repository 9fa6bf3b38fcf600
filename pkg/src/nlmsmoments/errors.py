"""Exception hierarchy shared by every module."""


class NLMSMomentsError(Exception):
    """Base class for all package errors."""


class ValidationError(NLMSMomentsError, ValueError):
    """Input outside the domain of an operation (bad spectrum, dimensions, parameters)."""


class DimensionError(ValidationError):
    """Filter length too small for the requested moment to be finite."""


class ConditioningError(NLMSMomentsError, ArithmeticError):
    """A closed-form evaluation lost too much precision to be trusted."""


class PoleError(ConditioningError):
    """A partial-fraction denominator vanishes at the query point."""

    def __init__(self, message, x=None):
        super().__init__(message)
        self.x = x


class InstabilityError(NLMSMomentsError, ArithmeticError):
    """Steady state requested for a step size with rho(F) >= 1."""


class SimulationError(NLMSMomentsError, RuntimeError):
    """The Monte-Carlo recursion hit a degenerate sample (e.g. zero-norm regressor)."""
