"""Exception hierarchy.

The CLI maps these onto exit codes: schema problems exit 2, mathematical
inconsistencies exit 3, tolerance failures exit 4.
"""

from __future__ import annotations


class GliftError(Exception):
    """Base class for every error raised by the package."""

    exit_code = 1


class SchemaError(GliftError, ValueError):
    """Malformed input: unknown catalog key, bad descriptor, wrong shape."""

    exit_code = 2


class InconsistencyError(GliftError):
    """The input data contradicts the mathematics (non-cocycle, non-central H, ...).

    ``location`` names the offending simplex or sample when one is known.
    """

    exit_code = 3

    def __init__(self, message: str, location=None):
        if location is not None:
            message = f"{message} (at {location})"
        super().__init__(message)
        self.location = location


class BranchCutError(InconsistencyError):
    """A logarithm or section was evaluated on its branch cut."""


class ToleranceError(GliftError):
    """A numerical check exceeded its stated tolerance."""

    exit_code = 4

    def __init__(self, message: str, value: float | None = None, tolerance: float | None = None):
        if value is not None and tolerance is not None:
            message = f"{message}: {value:.3e} > {tolerance:.1e}"
        super().__init__(message)
        self.value = value
        self.tolerance = tolerance
