"""Exception types shared across the package."""


class GuidePeakError(Exception):
    """Base class for all package errors."""


class DomainError(GuidePeakError, ValueError):
    """An argument lies outside the domain where a formula is defined."""


class NumericalToleranceError(GuidePeakError, ArithmeticError):
    """A quadrature did not reach its tolerance.

    ``residual`` holds the last error estimate (relative to the signal scale).
    """

    def __init__(self, message, residual=float("nan")):
        super().__init__(message)
        self.residual = residual


class UnsupportedSourceError(GuidePeakError, ValueError):
    """The requested source kind cannot be handled by this evaluator."""


class NoPeakError(GuidePeakError):
    """No sample of a series rises above the noise floor."""


class SaddlePeakVanished(GuidePeakError):
    """The positive-saddle intensity has no interior maximum in time."""


class CalibrationError(GuidePeakError, ValueError):
    """Peak heights cannot establish the 1/0 calibration levels."""


class StructuralError(GuidePeakError, ValueError):
    """Inputs have inconsistent structure (e.g. mismatched peak counts)."""


class ConfigError(GuidePeakError, ValueError):
    """Invalid experiment configuration."""
