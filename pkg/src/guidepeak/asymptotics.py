"""Saddle-pole approximation of the sharp-onset field and the effect range.

For the step source ``exp(-i w0 t) Theta(t)`` the field integral has two
saddles at ``+/- beta - i n1`` with ``beta = w_c / sqrt(1 - z**2/(c t)**2)``
and a pole at the carrier. The positive-saddle intensity predicts the
arrival time of the ubiquitous peak; its maximum over z has a closed form.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from typing import Optional, Tuple

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import DomainError, SaddlePeakVanished
from .medium import GuideMedium, wavenumber, wavenumber_derivative
from .source import SourceSpec

__all__ = [
    "SaddleEval",
    "EffectRange",
    "saddle_frequencies",
    "pole_indicator",
    "approx_field",
    "saddle_plus_intensity",
    "tau_Ts_plus",
    "tau_M",
    "effect_range",
    "group_velocity_at_saddle",
    "XI_UPPER",
]

XI_UPPER = 3.0 / 2.0**1.5


@dataclass(frozen=True)
class SaddleEval:
    z: float
    t: float
    beta: float
    omega_s_plus: complex
    omega_s_minus: complex
    g: float
    phi_p: complex
    phi_s_plus: complex
    phi_s_minus: complex
    approx: complex
    env_lo: float
    env_hi: float
    radicand_negative: bool = False


@dataclass(frozen=True)
class EffectRange:
    z_min: float
    z_max: float
    z_M: float
    tau_M: float
    xi: float
    z_noise: Optional[float] = None
    noise_floor: Optional[float] = None
    omega0: Optional[float] = None
    omega_c: Optional[float] = None
    n1: Optional[float] = None
    delta_omega: Optional[float] = None

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _light_ratio(z, t, m: GuideMedium):
    z = np.asarray(z, dtype=float)
    t = np.asarray(t, dtype=float)
    if np.any(t <= z / m.c):
        raise DomainError("t must exceed z/c (outside the light cone)")
    return np.sqrt(1.0 - (z / (m.c * t)) ** 2)


def saddle_frequencies(z, t, m: GuideMedium):
    """(beta, omega_s_plus, omega_s_minus) for t > z/c."""
    root = _light_ratio(z, t, m)
    beta = m.omega_c / root
    return beta, beta - 1j * m.n1, -beta - 1j * m.n1


def _pole_terms(beta, omega0, m: GuideMedium):
    first = (omega0 - beta) * (omega0 * beta - m.omega_c**2)
    radicand = (beta**2 - m.omega_c**2) * (-(omega0**2) + 2.0 * beta * omega0 - m.omega_c**2)
    return first, radicand


def pole_indicator(z, t, s: SourceSpec, m: GuideMedium):
    """Sign-significant pole condition g(z, t); the pole contributes when g > 0.

    A negative inner radicand contributes only its (zero) real square root.
    """
    beta, _, _ = saddle_frequencies(z, t, m)
    first, radicand = _pole_terms(beta, s.omega0, m)
    g = first + m.n1 * np.sqrt(np.maximum(radicand, 0.0))
    return g[()] if np.ndim(g) == 0 else g


def _saddle_component(z, t, sign, s: SourceSpec, m: GuideMedium):
    root = _light_ratio(z, t, m)
    pref = 1j / math.sqrt(2.0 * math.pi) * z * np.sqrt(-sign * 1j + 0j) * math.sqrt(m.omega_c)
    pref = pref / (m.c * t**1.5 * np.sqrt(root))
    num = np.exp(-t * m.n1 - sign * 1j * t * m.omega_c * root)
    den = m.omega_c - sign * root * (s.omega0 + 1j * m.n1)
    return pref * num / den


def approx_field(z: float, t: float, s: SourceSpec, m: GuideMedium) -> SaddleEval:
    """Saddle-pole decomposition of the sharp-onset field at (z, t).

    The window of ``s`` is ignored. Envelopes are the extremes of the
    two-saddle interference, ``(|phi_s+| -/+ |phi_s-|)**2``.
    """
    beta, wsp, wsm = saddle_frequencies(z, t, m)
    beta = float(beta)
    first, radicand = _pole_terms(beta, s.omega0, m)
    g = float(first + m.n1 * math.sqrt(max(radicand, 0.0)))
    k0 = complex(wavenumber(s.omega0, m))
    phi_p = -np.exp(1j * z * k0 - 1j * s.omega0 * t)
    sp = complex(_saddle_component(z, t, 1, s, m))
    sm = complex(_saddle_component(z, t, -1, s, m))
    total = (phi_p if g > 0 else 0.0) + sp + sm
    a, b = abs(sp), abs(sm)
    return SaddleEval(
        z=float(z),
        t=float(t),
        beta=beta,
        omega_s_plus=complex(wsp),
        omega_s_minus=complex(wsm),
        g=g,
        phi_p=complex(phi_p),
        phi_s_plus=sp,
        phi_s_minus=sm,
        approx=complex(total),
        env_lo=(a - b) ** 2,
        env_hi=(a + b) ** 2,
        radicand_negative=bool(radicand < 0),
    )


def saddle_plus_intensity(z, t, s: SourceSpec, m: GuideMedium):
    """|phi_s+|**2, vectorized over t."""
    return np.abs(_saddle_component(z, np.asarray(t, dtype=float), 1, s, m)) ** 2


def _log_intensity(z, t, s: SourceSpec, m: GuideMedium):
    # log|phi_s+|^2 without overflow for large t
    root = np.sqrt(1.0 - (z / (m.c * t)) ** 2)
    den = (m.omega_c - root * s.omega0) ** 2 + (root * m.n1) ** 2
    return (
        2.0 * np.log(z) + np.log(m.omega_c) - 2.0 * np.log(m.c) - math.log(2.0 * math.pi)
        - 3.0 * np.log(t) - np.log(root) - 2.0 * t * m.n1 - np.log(den)
    )


def _dlog_intensity(z, t, s: SourceSpec, m: GuideMedium):
    """d/dt of :func:`_log_intensity`, analytic."""
    a = (z / m.c) ** 2
    root2 = 1.0 - a / t**2
    root = np.sqrt(root2)
    droot = a / (t**3 * root)
    den = (m.omega_c - root * s.omega0) ** 2 + root2 * m.n1**2
    dden = 2.0 * droot * (-s.omega0 * (m.omega_c - root * s.omega0) + root * m.n1**2)
    return -3.0 / t - a / (t**3 * root2) - 2.0 * m.n1 - dden / den


def _scan_times(z, s: SourceSpec, m: GuideMedium, n=4000):
    front = z / m.c
    late = 100.0 / m.n1 if m.n1 > 0 else 1e3 * max(front, 1.0 / abs(m.omega_c - s.omega0 + 1e-300))
    return front + np.geomspace(1e-9 * front, late + 100.0 * front, n)


def tau_Ts_plus(z: float, s: SourceSpec, m: GuideMedium) -> float:
    """Time of the interior maximum of |phi_s+|**2 at position z.

    The intensity diverges at the light cone; the interior maximum is
    bracketed on a log-spaced scan and refined as the root of the analytic
    time derivative, which is far more precise than searching the maximum
    itself (finite differences in z rely on it). Raises :class:`SaddlePeakVanished` when no interior maximum exists.
    """
    if not z > 0:
        raise DomainError("z must be > 0")
    t = _scan_times(z, s, m)
    f = _log_intensity(z, t, s, m)
    interior = np.flatnonzero((f[1:-1] > f[:-2]) & (f[1:-1] >= f[2:])) + 1
    if interior.size == 0:
        raise SaddlePeakVanished(f"no interior saddle maximum at z={z!r}")
    i = interior[np.argmax(f[interior])]
    lo, hi = t[i - 1], t[i + 1]
    if not (_dlog_intensity(z, lo, s, m) > 0 > _dlog_intensity(z, hi, s, m)):
        res = minimize_scalar(lambda tt: -_log_intensity(z, tt, s, m), bracket=(lo, t[i], hi), method="golden")
        return float(res.x)
    return float(brentq(lambda tt: _dlog_intensity(z, tt, s, m), lo, hi, xtol=1e-15 * t[i], rtol=4 * np.finfo(float).eps))


def tau_M(s: SourceSpec, m: GuideMedium) -> float:
    """Closed-form maximum over z of the positive-saddle peak time."""
    if not m.n1 > 0:
        raise DomainError("tau_M requires n1 > 0")
    if m.n1 / s.omega0 >= 1e-3:
        raise DomainError(f"tau_M requires n1/omega0 < 1e-3, got {m.n1 / s.omega0!r}")
    xi = m.omega_c / s.omega0
    if not xi > 1.0:
        raise DomainError(f"tau_M requires xi = omega_c/omega0 > 1, got {xi!r}")
    if not xi < XI_UPPER:
        raise DomainError(f"tau_M requires xi = omega_c/omega0 < 3/2**1.5 = {XI_UPPER!r}, got {xi!r}")
    return (3.0 - 2.0 * xi**2 - 3.0 * (xi**2 - 1.0) ** (2.0 / 3.0)) / xi**2 / (2.0 * m.n1)


def _has_interior_max(z, s, m) -> bool:
    try:
        tau_Ts_plus(z, s, m)
    except SaddlePeakVanished:
        return False
    return True


def _slope_excess(z, s, m, rel_step=1e-3):
    h = rel_step * z
    slope = (tau_Ts_plus(z + h, s, m) - tau_Ts_plus(z - h, s, m)) / (2.0 * h)
    return abs(slope) * m.c - 1.0


def _z_M(s, m, z_start):
    lo = z_start
    if not _has_interior_max(lo, s, m):
        raise SaddlePeakVanished(f"no interior saddle maximum even at z={lo!r}")
    hi = 2.0 * lo
    while _has_interior_max(hi, s, m):
        lo, hi = hi, 2.0 * hi
        if hi > 1e9:
            return math.inf
    while hi - lo > 1e-7 * hi:
        mid = 0.5 * (lo + hi)
        if _has_interior_max(mid, s, m):
            lo = mid
        else:
            hi = mid
    return lo


def effect_range(
    s: SourceSpec,
    m: GuideMedium,
    noise_floor: Optional[float] = None,
    delta_omega: Optional[float] = None,
) -> EffectRange:
    """Spatial range of simultaneous arrival predicted from the positive saddle.

    ``delta_omega`` defaults to the source window plateau half-width.
    """
    t_max = tau_M(s, m)
    xi = m.omega_c / s.omega0
    dw = s.window.delta_omega if delta_omega is None else delta_omega
    if not dw > 0:
        raise DomainError("delta_omega must be > 0 to bound the effect")
    z_max = m.c * t_max * math.sqrt(1.0 - m.omega_c**2 / (s.omega0 + dw) ** 2)

    z_lo = 1e-4 * m.c * t_max
    z_M = _z_M(s, m, z_lo)
    upper = min(z_M, 10.0 * m.c * t_max) * 0.99
    grid = np.geomspace(z_lo, upper, 200)
    excess = np.array([_slope_excess(z, s, m) for z in grid])
    cross = np.flatnonzero((excess[:-1] > 0) & (excess[1:] <= 0))
    if cross.size == 0:
        raise DomainError("peak time never moves slower than light; no z_min")
    j = cross[0]
    z_min = brentq(lambda z: _slope_excess(z, s, m), grid[j], grid[j + 1], xtol=1e-9 * grid[j])

    z_noise = None
    if noise_floor is not None:
        z_noise = _z_noise(s, m, noise_floor, z_lo, upper, z_M)
    return EffectRange(
        z_min=float(z_min),
        z_max=float(z_max),
        z_M=float(z_M),
        tau_M=float(t_max),
        xi=float(xi),
        z_noise=z_noise,
        noise_floor=noise_floor,
        omega0=s.omega0,
        omega_c=m.omega_c,
        n1=m.n1,
        delta_omega=dw,
    )


def predicted_peak_height(z: float, s: SourceSpec, m: GuideMedium) -> float:
    return float(saddle_plus_intensity(z, tau_Ts_plus(z, s, m), s, m))


def _z_noise(s, m, floor, z_lo, z_hi, z_cap):
    grid = np.geomspace(z_lo, z_hi, 200)
    heights = np.array([predicted_peak_height(z, s, m) for z in grid])
    above = np.flatnonzero(heights >= floor)
    if above.size == 0:
        return 0.0
    j = above[-1]
    if j + 1 >= grid.size:
        # still above the floor where the saddle maximum vanishes
        return float(z_cap)
    return float(brentq(lambda z: predicted_peak_height(z, s, m) - floor, grid[j], grid[j + 1]))


def group_velocity_at_saddle(z: float, t: float, m: GuideMedium) -> Tuple[float, bool]:
    """Group velocity 1/Re(dk/dw) at the positive saddle and whether
    Re(omega_s+) lies above the cut-off."""
    _, wsp, _ = saddle_frequencies(z, t, m)
    slowness = wavenumber_derivative(complex(wsp), m)
    return float(1.0 / np.real(slowness)), bool(np.real(wsp) > m.omega_c)
