"""Simulation of the ubiquitous peak of a pulse in an absorbing waveguide."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    CalibrationError,
    ConfigError,
    DomainError,
    GuidePeakError,
    NoPeakError,
    NumericalToleranceError,
    SaddlePeakVanished,
    StructuralError,
    UnsupportedSourceError,
)
from .medium import GuideMedium, LorentzParams, penetration_length, wavenumber  # noqa: E402
from .source import PulseTrain, SourceSpec, WindowKind, WindowSpec, window_value  # noqa: E402
from .propagation import QuadratureConfig, TimeSeries, field_at, field_series, peak_time, train_series  # noqa: E402
from .asymptotics import approx_field, effect_range, tau_M, tau_Ts_plus  # noqa: E402
from .receiver import ReceiverConfig, decode, detect_peaks, simultaneity_report  # noqa: E402

__all__ = [
    "__version__",
    "CalibrationError",
    "ConfigError",
    "DomainError",
    "GuidePeakError",
    "NoPeakError",
    "NumericalToleranceError",
    "SaddlePeakVanished",
    "StructuralError",
    "UnsupportedSourceError",
    "GuideMedium",
    "LorentzParams",
    "penetration_length",
    "wavenumber",
    "PulseTrain",
    "SourceSpec",
    "WindowKind",
    "WindowSpec",
    "window_value",
    "QuadratureConfig",
    "TimeSeries",
    "field_at",
    "field_series",
    "peak_time",
    "train_series",
    "approx_field",
    "effect_range",
    "tau_M",
    "tau_Ts_plus",
    "ReceiverConfig",
    "decode",
    "detect_peaks",
    "simultaneity_report",
]
