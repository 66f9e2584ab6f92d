"""Receiver-side peak finding, bit decoding and the simultaneity check."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple


from .errors import CalibrationError, DomainError, StructuralError
from .medium import SPEED_OF_LIGHT

__all__ = [
    "ReceiverConfig",
    "PeakEvent",
    "PeakDetector",
    "DecodedMessage",
    "SimultaneityReport",
    "detect_peaks",
    "decode",
    "simultaneity_report",
]


@dataclass(frozen=True)
class ReceiverConfig:
    noise_floor: float = 0.5e-5
    hold_time: float = 0.1e-6
    sample_period: Optional[float] = None

    def __post_init__(self):
        if not self.noise_floor > 0:
            raise DomainError("noise_floor must be > 0")
        if not self.hold_time > 0:
            raise DomainError("hold_time must be > 0")
        if self.sample_period is not None and not self.hold_time > self.sample_period:
            raise DomainError("hold_time must exceed sample_period")


@dataclass(frozen=True)
class PeakEvent:
    tau_P: float
    peak_time: float
    height: float


class PeakDetector:
    """Streaming peak finder.

    A running maximum at t* is confirmed once every sample in (t*, t* + dt]
    stays below it; the event is reported at tau_P = t* + dt. Samples below
    the noise floor count as zero. After a confirmed peak the detector stays
    disarmed until a sample drops below the floor.
    """

    def __init__(self, cfg: ReceiverConfig):
        self.cfg = cfg
        self.armed = True
        self._cand: Optional[Tuple[float, float]] = None
        self._dipped = False

    def push(self, t: float, value: float) -> Optional[PeakEvent]:
        below = value < self.cfg.noise_floor
        if not self.armed:
            if below:
                self.armed = True
            return None
        if below:
            self._dipped = True
        elif self._cand is None or value > self._cand[1]:
            self._cand = (t, value)
            self._dipped = False
        if self._cand is None:
            return None
        t_star, height = self._cand
        if t - t_star < self.cfg.hold_time * (1 - 1e-9):
            return None
        self._cand = None
        self.armed = self._dipped
        self._dipped = False
        return PeakEvent(tau_P=t_star + self.cfg.hold_time, peak_time=t_star, height=height)


def detect_peaks(ts, cfg: ReceiverConfig) -> List[PeakEvent]:
    """Run :class:`PeakDetector` over the |phi|**2 samples of a series."""
    if cfg.sample_period is not None and ts.times.size > 1:
        if abs(ts.t_step - cfg.sample_period) > 1e-6 * cfg.sample_period:
            raise DomainError(
                f"series step {ts.t_step!r} differs from configured sample_period {cfg.sample_period!r}"
            )
    det = PeakDetector(cfg)
    events = []
    for t, v in zip(ts.times.tolist(), ts.abs2.tolist()):
        ev = det.push(t, v)
        if ev is not None:
            events.append(ev)
    return events


@dataclass(frozen=True)
class DecodedMessage:
    bits: Tuple[int, ...]
    level_one: float
    level_zero: float

    @property
    def text(self) -> str:
        return "".join(str(b) for b in self.bits)


def decode(events: Sequence[PeakEvent], min_gap: float = 0.1) -> DecodedMessage:
    """Classify peak heights against the first two (calibration) peaks.

    The higher of the first two heights is logical 1, the lower logical 0;
    every peak is assigned by the midpoint threshold.
    """
    if len(events) < 2:
        raise CalibrationError(f"need at least 2 peaks for calibration, got {len(events)}")
    h1, h2 = events[0].height, events[1].height
    one, zero = max(h1, h2), min(h1, h2)
    if (one - zero) < min_gap * one:
        raise CalibrationError(
            f"ambiguous calibration: first two heights {h1!r}, {h2!r} differ by less than {min_gap:.0%}"
        )
    threshold = 0.5 * (one + zero)
    bits = tuple(1 if ev.height >= threshold else 0 for ev in events)
    return DecodedMessage(bits=bits, level_one=one, level_zero=zero)


@dataclass
class SimultaneityReport:
    """Pairwise light-relay margins ``tau_P(z1) + (z2 - z1)/c - tau_P(z2)``."""

    positions: List[float]
    spreads: List[float]
    margins: List[dict] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(m["margin"] > 0 for m in self.margins)

    @property
    def min_margin(self) -> float:
        return min((m["margin"] for m in self.margins), default=float("inf"))

    def to_dict(self) -> dict:
        return {
            "positions": self.positions,
            "spreads": self.spreads,
            "margins": self.margins,
            "min_margin": self.min_margin,
            "passed": self.passed,
        }


def simultaneity_report(
    per_receiver: Iterable[Tuple[float, Sequence[PeakEvent]]], c: float = SPEED_OF_LIGHT
) -> SimultaneityReport:
    receivers = sorted(per_receiver, key=lambda item: item[0])
    if len(receivers) < 2:
        raise StructuralError("simultaneity needs at least 2 receivers")
    counts = {z: len(evs) for z, evs in receivers}
    if len(set(counts.values())) != 1:
        detail = ", ".join(f"z={z!r}: {n}" for z, n in counts.items())
        raise StructuralError(f"receivers found different numbers of peaks ({detail})")
    n_peaks = len(receivers[0][1])
    spreads = []
    for i in range(n_peaks):
        taus = [evs[i].tau_P for _, evs in receivers]
        spreads.append(max(taus) - min(taus))
    margins = []
    for (z1, e1), (z2, e2) in itertools.combinations(receivers, 2):
        for i in range(n_peaks):
            margin = e1[i].tau_P + (z2 - z1) / c - e2[i].tau_P
            margins.append({"peak": i, "z1": z1, "z2": z2, "margin": margin})
    return SimultaneityReport(positions=[z for z, _ in receivers], spreads=spreads, margins=margins)
