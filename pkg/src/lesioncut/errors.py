"""Exception types raised by the lesioncut pipeline."""

from __future__ import annotations


class LesionCutError(Exception):
    """Base class for all package-specific errors."""


class UnsupportedFormatError(LesionCutError):
    """Image file is not an 8-bit grayscale or RGB PNG/PPM."""


class CorruptImageError(LesionCutError):
    """Image file exists but cannot be decoded."""


class InvalidWindowError(LesionCutError):
    """Filter window is not an odd integer >= 3."""


class GeometryMismatchError(LesionCutError):
    """Two rasters that must share a shape do not."""


class EmptyGroundTruthError(LesionCutError):
    """Ground-truth mask contains no positive pixels."""


class EmptyReportListError(LesionCutError):
    """Aggregation requested over zero reports."""


class EmptySideError(LesionCutError):
    """A normalized-cut partition leaves one side empty."""


class ZeroAssociationError(LesionCutError):
    """A partition side has zero total degree, so ncut is undefined."""


class NoValidSplitError(LesionCutError):
    """No threshold on the eigenvector produces a valid bipartition."""


class ConvergenceFailureError(LesionCutError):
    """Eigensolver did not reach the requested residual tolerance.

    Carries the iteration budget that was exhausted and the residual
    achieved when the solver gave up.
    """

    def __init__(self, iterations: int, residual: float):
        self.iterations = int(iterations)
        self.residual = float(residual)
        super().__init__(
            f"eigensolver failed to converge after {self.iterations} "
            f"iterations (residual {self.residual:.3e})"
        )


class ConfigParseError(LesionCutError):
    """Run configuration file is missing, malformed, or inconsistent."""


class EmptyBatchError(LesionCutError):
    """Run configuration declares no entries, so there is nothing to do."""
