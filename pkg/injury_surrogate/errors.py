"""Exceptions raised across the surrogate toolkit.

Every error derives from ``SurrogateError`` (itself a ``ValueError``) so callers
that only care about "bad input or bad numbers" can catch a single type, while the
command-line layer can map specific failures to exit codes.
"""

from __future__ import annotations

from typing import TYPE_CHECKING

if TYPE_CHECKING:
    from collections.abc import Sequence

    from injury_surrogate.campaign.records import InputPoint


class SurrogateError(ValueError):
    """Base class for all toolkit errors."""


class ParameterDomainError(SurrogateError):
    """A kernel hyperparameter lies outside its admissible domain."""


class ConfigurationError(SurrogateError):
    """A design box, run configuration or option is unusable."""


class DataError(SurrogateError):
    """Input data is missing, malformed or non-finite."""


class RangeError(DataError):
    """An input lies outside the configured design box."""


class ConflictError(DataError):
    """Two records share an input but disagree on the observed output."""


class NumericalError(SurrogateError):
    """A factorization or posterior quantity could not be computed reliably."""


class FitError(SurrogateError):
    """Hyperparameter fitting produced no usable model."""


class ModelStateError(SurrogateError):
    """An operation needs a trained model and did not get one."""


class RequestError(SurrogateError):
    """A request cannot be satisfied with the given arguments."""


class UndefinedReferenceError(SurrogateError):
    """A relative error was requested against a zero reference value."""


class OracleUnavailableError(SurrogateError):
    """The simulation oracle has no result for one or more requested points."""

    def __init__(self, msg: str, points: Sequence[InputPoint]) -> None:
        super().__init__(msg)
        self.points = tuple(points)
