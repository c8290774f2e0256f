"""
Error Hierarchy

Every failure the pipeline reports deliberately is a ``ClimdeltaError``.
The ``exit_code`` class attribute drives the CLI exit-code policy:

    1  user error (bad arguments, missing files, malformed manifest)
    2  data validation (unparseable or invalid input data)
    3  numerical failure (initialization, empty functional, unidentifiable model)

Usage:
    from src.core.errors import EmptyZoneError

    raise EmptyZoneError("zone Arctic has no grid locations")
"""

from typing import Any, Dict, Optional


class ClimdeltaError(Exception):
    """Base class for all domain errors."""

    exit_code: int = 1
    category: str = "user_error"

    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.message = message
        self.details: Dict[str, Any] = details

    def to_dict(self) -> Dict[str, Any]:
        """Machine-readable representation for JSON error output."""
        return {
            "error": type(self).__name__,
            "category": self.category,
            "exit_code": self.exit_code,
            "message": self.message,
            "details": {k: _jsonable(v) for k, v in self.details.items()},
        }

    def __reduce__(self):
        # Subclasses take different constructor arguments; rebuild from state
        # so errors survive the trip back from worker processes.
        return _restore_error, (type(self), self.message, self.details, dict(self.__dict__))


def _restore_error(cls, message: str, details: Dict[str, Any], state: Dict[str, Any]) -> "ClimdeltaError":
    error = cls.__new__(cls)
    ClimdeltaError.__init__(error, message, **details)
    error.__dict__.update(state)
    return error


def _jsonable(value: Any) -> Any:
    if isinstance(value, (str, int, float, bool)) or value is None:
        return value
    return str(value)


# ============================================================================
# User errors (exit 1)
# ============================================================================

class UsageError(ClimdeltaError):
    """Invalid command-line usage or inconsistent options."""


class MissingInputError(ClimdeltaError):
    """A referenced input file does not exist."""


class ManifestError(ClimdeltaError):
    """Malformed manifest, duplicate key or unknown enum token."""


class InvalidParameterError(ClimdeltaError, ValueError):
    """A distribution parameter is outside its domain (e.g. sigma <= 0)."""


# ============================================================================
# Data validation errors (exit 2)
# ============================================================================

class DataValidationError(ClimdeltaError):
    """Input data failed validation."""

    exit_code = 2
    category = "data_validation"


class EnsembleParseError(DataValidationError):
    """Ensemble identifier text does not match r<i>i<i>p<i>f<i>."""

    def __init__(self, text: str, token: str):
        super().__init__(
            f"Malformed ensemble id {text!r}: unexpected token {token!r}",
            text=text,
            token=token,
        )
        self.token = token


class SeriesValidationError(DataValidationError):
    """An annual series violates a hard invariant."""


class GridError(DataValidationError):
    """Gridded input is malformed (bad latitude, shape mismatch, bad CSV)."""


class EmptyZoneError(DataValidationError):
    """A climate zone contains no grid locations."""


class MissingDataError(DataValidationError):
    """Missing values where the computation requires complete data."""


# ============================================================================
# Numerical failures (exit 3)
# ============================================================================

class NumericalError(ClimdeltaError):
    """A numerical procedure could not produce a result."""

    exit_code = 3
    category = "numerical_failure"


class InitializationError(NumericalError):
    """MCMC could not find a starting state with finite likelihood."""


class InvalidExtrapolationError(NumericalError):
    """Linearly extrapolated parameters leave their domain at a requested year."""

    def __init__(self, year: int, parameter: str, value: float):
        super().__init__(
            f"Parameter {parameter} = {value:.6g} is invalid at year {year}",
            year=year,
            parameter=parameter,
            value=value,
        )
        self.year = year
        self.parameter = parameter
        self.value = value


class EmptyResultError(NumericalError):
    """Every posterior draw was excluded from a functional."""


class UnidentifiableComponentError(NumericalError):
    """A variance component cannot be estimated from the design."""

    def __init__(self, component: str, reason: Optional[str] = None):
        message = f"Variance component {component} is unidentifiable"
        if reason:
            message = f"{message}: {reason}"
        super().__init__(message, component=component)
        self.component = component


class UndefinedStatisticError(NumericalError):
    """A summary statistic is undefined for the given inputs (e.g. R^2 with tau_R = 0)."""
