"""Absorbing, dispersive wave-guide medium.

All frequencies are angular (rad/s). The medium enters the propagation
only through the reduced refraction index ``1 + i n1/omega``, which turns
the guide dispersion relation into

    k(omega) = sqrt((omega + i n1)**2 - omega_c**2) / c.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.constants import c as SPEED_OF_LIGHT

from .errors import DomainError

__all__ = [
    "SPEED_OF_LIGHT",
    "LorentzParams",
    "GuideMedium",
    "ValidityReport",
    "lorentz_refraction",
    "reduced_refraction",
    "assumption_margins",
    "wavenumber",
    "wavenumber_derivative",
    "penetration_length",
]


@dataclass(frozen=True)
class LorentzParams:
    """Single-resonance Lorentz oscillator (plasma, resonance, damping)."""

    omega_p: float
    omega_L: float
    delta: float

    def __post_init__(self):
        for name in ("omega_p", "omega_L", "delta"):
            if not getattr(self, name) > 0:
                raise DomainError(f"LorentzParams.{name} must be > 0")

    @property
    def n1(self) -> float:
        """Absorption parameter of the high-damping reduction."""
        return self.omega_p**2 / (4.0 * self.delta)


@dataclass(frozen=True)
class GuideMedium:
    omega_c: float
    n1: float
    lorentz: Optional[LorentzParams] = None
    c: float = SPEED_OF_LIGHT

    def __post_init__(self):
        if not self.omega_c > 0:
            raise DomainError("omega_c must be > 0")
        if not self.n1 >= 0:
            raise DomainError("n1 must be >= 0")
        if not self.c > 0:
            raise DomainError("c must be > 0")
        if self.lorentz is not None:
            ref = self.lorentz.n1
            if abs(self.n1 - ref) > 1e-12 * abs(ref):
                raise DomainError(
                    f"n1={self.n1!r} inconsistent with Lorentz parameters "
                    f"(omega_p**2/(4 delta) = {ref!r})"
                )

    @classmethod
    def from_lorentz(cls, omega_c: float, lorentz: LorentzParams, c: float = SPEED_OF_LIGHT):
        return cls(omega_c=omega_c, n1=lorentz.n1, lorentz=lorentz, c=c)


@dataclass(frozen=True)
class ValidityReport:
    band_center: float
    band_halfwidth: float
    margin_resonance: float
    margin_plasma: float
    threshold: float = 10.0

    @property
    def valid(self) -> bool:
        return self.margin_resonance > self.threshold and self.margin_plasma > self.threshold

    def to_dict(self) -> dict:
        return {
            "band_center": self.band_center,
            "band_halfwidth": self.band_halfwidth,
            "margin_resonance": self.margin_resonance,
            "margin_plasma": self.margin_plasma,
            "threshold": self.threshold,
            "valid": self.valid,
        }


def _check_nonzero(omega):
    if np.any(np.asarray(omega) == 0):
        raise DomainError("refraction index undefined at zero frequency")


def _absorbing_root(radicand):
    root = np.sqrt(np.asarray(radicand, dtype=complex))
    return np.where(root.imag < 0, -root, root)


def lorentz_refraction(omega, p: LorentzParams):
    """Full Lorentz-model refraction index, branch with Im >= 0."""
    _check_nonzero(omega)
    w = np.asarray(omega, dtype=float)
    detune = w**2 - p.omega_L**2
    denom = detune**2 + 4.0 * p.delta**2 * w**2
    eta2 = 1.0 - p.omega_p**2 * (detune - 2j * p.delta * w) / denom
    out = _absorbing_root(eta2)
    return out[()] if out.ndim == 0 else out


def reduced_refraction(omega, n1: float):
    """Refraction index ``1 + i n1/omega`` of the strongly damped limit."""
    _check_nonzero(omega)
    out = 1.0 + 1j * n1 / np.asarray(omega, dtype=float)
    return out[()] if np.ndim(out) == 0 else out


def assumption_margins(
    band_center: float,
    band_halfwidth: float,
    p: LorentzParams,
    threshold: float = 10.0,
    n_grid: int = 2001,
) -> ValidityReport:
    """How well the high-damping conditions hold across a frequency band.

    Both margins are minima over a uniform grid spanning
    ``band_center +/- band_halfwidth``:

    * ``margin_resonance = min delta / |(w**2 - wL**2) / (2 w)|``
    * ``margin_plasma    = min delta / (wp**2 / (2 w))``
    """
    lo, hi = band_center - band_halfwidth, band_center + band_halfwidth
    if lo <= 0 or band_halfwidth < 0:
        raise DomainError(f"band [{lo!r}, {hi!r}] must lie at positive frequency")
    w = np.linspace(lo, hi, max(int(n_grid), 1000))
    detune = np.abs((w**2 - p.omega_L**2) / (2.0 * w))
    with np.errstate(divide="ignore"):
        res = np.where(detune > 0, p.delta / detune, np.inf)
    plasma = p.delta * 2.0 * w / p.omega_p**2
    return ValidityReport(
        band_center=float(band_center),
        band_halfwidth=float(band_halfwidth),
        margin_resonance=float(res.min()),
        margin_plasma=float(plasma.min()),
        threshold=float(threshold),
    )


def wavenumber(omega, m: GuideMedium):
    """Complex guide wavenumber (rad/m) on the absorbing branch.

    Im k >= 0 everywhere on the real axis. Where the radicand is real and
    positive (n1 = 0, |omega| > omega_c) the sign follows omega, so that
    k -> omega/c for |omega| -> infinity and k stays continuous as n1 -> 0.
    """
    w = np.asarray(omega, dtype=float)
    root = np.sqrt((w + 1j * m.n1) ** 2 - m.omega_c**2)
    flip = (root.imag < 0) | ((root.imag == 0) & (root.real * w < 0))
    k = np.where(flip, -root, root) / m.c
    return k[()] if k.ndim == 0 else k


def wavenumber_derivative(omega, m: GuideMedium):
    """dk/domega = (omega + i n1) / (c**2 k), for complex omega as well."""
    w = np.asarray(omega, dtype=complex)
    root = np.sqrt((w + 1j * m.n1) ** 2 - m.omega_c**2)
    root = np.where(root.imag < 0, -root, root)
    out = (w + 1j * m.n1) / (m.c * root)
    return out[()] if out.ndim == 0 else out


def penetration_length(omega, m: GuideMedium):
    """Intensity penetration depth ``1 / (2 Im k)``; ``inf`` when lossless."""
    im = np.imag(wavenumber(omega, m))
    with np.errstate(divide="ignore"):
        out = np.where(im > 0, 1.0 / (2.0 * np.where(im > 0, im, 1.0)), np.inf)
    return out[()] if out.ndim == 0 else out
