"""Outliers of randomly perturbed banded Toeplitz matrices and the tableau-indexed
random fields that describe them."""

from .errors import (BudgetError, ConfigError, ConsistencyError, DomainError, OnCurveError,
                     RegionError, SolverError, ToeplitzError, UnitModulusError)
from .symbol import ELLIPSE, JORDAN, LIMACON, Symbol, resolve_symbol
from .noise import FixedNoise, NoiseSource
from .points import PointProcessSample
from .tableaux import FieldTableauPair, enumerate_pairs, is_valid_pair
from .field import FieldEvaluator, closed_form, find_zeros

__all__ = [
    "BudgetError", "ConfigError", "ConsistencyError", "DomainError", "OnCurveError",
    "RegionError", "SolverError", "ToeplitzError", "UnitModulusError",
    "Symbol", "JORDAN", "LIMACON", "ELLIPSE", "resolve_symbol",
    "NoiseSource", "FixedNoise", "PointProcessSample",
    "FieldTableauPair", "enumerate_pairs", "is_valid_pair",
    "FieldEvaluator", "closed_form", "find_zeros",
]
__version__ = "0.1.0"
