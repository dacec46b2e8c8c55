"""
Exception hierarchy for the clustering engine.

Everything a caller can trigger with bad input derives from ClusteringError, which is a
ValueError so plain `except ValueError` keeps working.
"""


class ClusteringError(ValueError):
    """Base class for all user-facing errors."""


class MetricError(ClusteringError):
    """Distance data that is not a usable metric (shape, sign, symmetry, finiteness)."""


class ObjectiveError(ClusteringError):
    """Unknown objective, malformed opening costs, or values outside the mode's domain."""


class InvalidParameterError(ClusteringError):
    """A numeric parameter (k, alpha, lambda, r_star, trials, ...) out of range."""


class OracleCapExceeded(ClusteringError):
    """Exhaustive enumeration refused because the instance is above the size cap."""


class InputFormatError(ClusteringError):
    """Malformed CSV input."""
