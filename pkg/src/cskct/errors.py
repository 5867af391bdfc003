"""Exception hierarchy shared by the modelling modules."""


class CSKError(Exception):
    """Base class for all package errors."""


class DomainError(CSKError, ValueError):
    """An argument lies outside the domain of the model."""


class DegenerateIntervalError(DomainError):
    """Distance interval has zero width, so a continuous average is undefined."""


class DimensionError(CSKError, ValueError):
    """Table or vector is too short for the requested memory length."""


class InfeasibleDesignError(CSKError):
    """Release concentrations violate the ordering of the signal-strength limits.

    Attributes
    ----------
    index:
        First threshold index ``j`` for which the strongest received strength
        of symbol ``j`` exceeds the weakest received strength of symbol ``j+1``.
    """

    def __init__(self, message: str, index: int | None = None):
        super().__init__(message)
        self.index = index


class NumericalError(CSKError, ArithmeticError):
    """Quadrature or another numerical routine failed to converge."""


class ConfigError(CSKError, ValueError):
    """Malformed or inconsistent experiment configuration."""
