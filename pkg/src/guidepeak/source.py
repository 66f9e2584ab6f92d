"""Frequency windows, source-plane boundary signals and pulse trains."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence, Tuple

import numpy as np

from .errors import DomainError

__all__ = [
    "WindowKind",
    "WindowSpec",
    "SourceSpec",
    "PulseTrain",
    "window_value",
    "source_amplitude",
    "pulse_train_amplitude",
]


class WindowKind(enum.IntEnum):
    SHARP = 1
    LINEAR = 2
    SMOOTH = 3


@dataclass(frozen=True)
class WindowSpec:
    """Window around the carrier: flat plateau of half-width ``delta_omega``
    followed by an edge of width ``alpha`` (kinds 2 and 3)."""

    kind: WindowKind
    delta_omega: float = 0.0
    alpha: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", WindowKind(self.kind))
        if self.kind != WindowKind.SHARP:
            if not self.delta_omega > 0:
                raise DomainError("delta_omega must be > 0 for windowed sources")
            if not self.alpha > 0:
                raise DomainError("alpha must be > 0 for windowed sources")

    @property
    def half_support(self) -> float:
        if self.kind == WindowKind.SHARP:
            return np.inf
        return self.delta_omega + self.alpha

    @property
    def compact(self) -> bool:
        return self.kind != WindowKind.SHARP


@dataclass(frozen=True)
class SourceSpec:
    omega0: float
    window: WindowSpec

    def __post_init__(self):
        if not self.omega0 > 0:
            raise DomainError("omega0 must be > 0")
        if self.window.compact and self.omega0 - self.window.half_support <= 0:
            raise DomainError(
                "window support must stay at positive frequency: "
                f"omega0 - (delta_omega + alpha) = {self.omega0 - self.window.half_support!r}"
            )


@dataclass(frozen=True)
class PulseTrain:
    """Weighted, delayed copies of one source signal.

    ``terms`` is a sequence of ``(weight, shift)`` pairs; shifts in seconds,
    strictly increasing and starting at zero.
    """

    source: SourceSpec
    terms: Tuple[Tuple[float, float], ...] = field(default=((1.0, 0.0),))

    def __post_init__(self):
        terms = tuple((float(b), float(s)) for b, s in self.terms)
        if not terms:
            raise DomainError("pulse train needs at least one term")
        shifts = [s for _, s in terms]
        if shifts[0] != 0.0:
            raise DomainError("first pulse shift must be 0")
        if any(b <= a for a, b in zip(shifts, shifts[1:])):
            raise DomainError("pulse shifts must be strictly increasing")
        object.__setattr__(self, "terms", terms)

    @property
    def weights(self) -> Tuple[float, ...]:
        return tuple(b for b, _ in self.terms)

    @property
    def shifts(self) -> Tuple[float, ...]:
        return tuple(s for _, s in self.terms)


def window_value(w: WindowSpec, omega):
    """Window value at a frequency offset ``omega`` from the carrier."""
    scalar = np.ndim(omega) == 0
    x = np.abs(np.atleast_1d(np.asarray(omega, dtype=float)))
    if w.kind == WindowKind.SHARP:
        out = np.ones_like(x)
    else:
        out = np.where(x < w.delta_omega, 1.0, 0.0)
        d = x - w.delta_omega
        edge = (d >= 0) & (d < w.alpha)
        de = d[edge]
        if w.kind == WindowKind.LINEAR:
            out[edge] = 1.0 - de / w.alpha
        else:
            out[edge] = np.exp(-(de**2) / (w.alpha**2 - de**2))
    return float(out[0]) if scalar else out


def source_amplitude(s: SourceSpec, t, quadrature=None):
    """Boundary signal at z = 0.

    The sharp source is ``exp(-i omega0 t) Theta(t)`` with Theta(0) = 1.
    Windowed sources go through the same quadrature as the field at z > 0.
    """
    t_arr = np.asarray(t, dtype=float)
    if s.window.kind == WindowKind.SHARP:
        out = np.where(t_arr >= 0, np.exp(-1j * s.omega0 * t_arr), 0.0 + 0.0j)
        return out[()] if out.ndim == 0 else out
    from .propagation import field_at

    flat = [field_at(0.0, float(tt), s, None, quadrature) for tt in t_arr.ravel()]
    out = np.asarray(flat, dtype=complex).reshape(t_arr.shape)
    return out[()] if out.ndim == 0 else out


def pulse_train_amplitude(p: PulseTrain, t, quadrature=None):
    t_arr = np.asarray(t, dtype=float)
    total = np.zeros(t_arr.shape, dtype=complex)
    for b, shift in p.terms:
        total = total + b * source_amplitude(p.source, t_arr - shift, quadrature)
    return total[()] if total.ndim == 0 else total


def make_train(source: SourceSpec, weights: Sequence[float], shifts: Sequence[float]) -> PulseTrain:
    if len(weights) != len(shifts):
        raise DomainError("weights and shifts must have equal length")
    return PulseTrain(source=source, terms=tuple(zip(weights, shifts)))
