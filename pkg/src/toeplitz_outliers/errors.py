"""Exception types shared across the package."""


class ToeplitzError(Exception):
    """Base class for all package errors."""


class DomainError(ToeplitzError, ValueError):
    """Argument outside the domain of an operation."""


class OnCurveError(ToeplitzError):
    """Point lies within tolerance of the symbol curve a(S^1)."""


class UnitModulusError(ToeplitzError):
    """A root has modulus within tolerance of 1, so the region is ambiguous."""


class ConsistencyError(ToeplitzError):
    """Two independent computations that must agree did not."""


class SolverError(ToeplitzError):
    """An iterative solver failed to converge."""

    def __init__(self, message, residuals=None):
        super().__init__(message)
        self.residuals = residuals


class BudgetError(ToeplitzError):
    """An enumeration exceeded its configured budget."""


class RegionError(ToeplitzError):
    """A point is not in the region an operation requires."""


class ConfigError(ToeplitzError):
    """Invalid experiment configuration."""
