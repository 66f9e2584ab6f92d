"""Experiment configuration: schema, loading and conversion to domain objects.

A config file is YAML (or JSON) with the sections ``medium``, ``source``,
``quadrature``, ``receiver``, ``sweep`` and ``figure`` plus the scalars
``output_dir`` and ``threads``. Unknown keys are rejected. A summary JSON
written by a previous run is also accepted; its ``config`` entry is used.
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import List, Literal, Optional, Union

import numpy as np
import yaml
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .errors import ConfigError, GuidePeakError
from .medium import GuideMedium, LorentzParams
from .propagation import QuadratureConfig
from .receiver import ReceiverConfig
from .source import PulseTrain, SourceSpec, WindowSpec

__all__ = ["ExperimentConfig", "load_config", "default_config", "FIGURES"]

FIGURES = ("fig1", "fig2", "fig3", "fig4", "fig5", "fig6")


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class LorentzModel(_Strict):
    omega_p: float
    omega_L: float
    delta: float


class MediumModel(_Strict):
    omega_c: float = 9.5e9
    n1: Optional[float] = 0.2e6
    lorentz: Optional[LorentzModel] = None


class WindowModel(_Strict):
    kind: Literal[1, 2, 3] = 3
    delta_omega: float = 0.8e9
    alpha: float = 0.8e9


class TrainTerm(_Strict):
    b: float
    shift: float


class SourceModel(_Strict):
    omega0: float = 9.49e9
    window: WindowModel = Field(default_factory=WindowModel)
    train: Optional[List[TrainTerm]] = None


class QuadratureModel(_Strict):
    n_omega: int = 2**12
    pv_scheme: Literal["plemelj", "contour-shift"] = "plemelj"
    contour_eps: float = 1.0e4
    tolerance: float = 1.0e-6
    t_start: float = 0.0
    t_step: Optional[float] = None
    n_t: Optional[int] = None
    t_stop: Optional[float] = None


class ReceiverModel(_Strict):
    noise_floor: float = 0.5e-5
    hold_time: float = 0.1e-6
    sample_period: Optional[float] = None


class SweepModel(_Strict):
    z: Optional[List[float]] = None
    z_start: Optional[float] = None
    z_stop: Optional[float] = None
    n_z: Optional[int] = None

    @model_validator(mode="after")
    def _one_form(self):
        ranged = (self.z_start, self.z_stop, self.n_z)
        if self.z is not None and any(v is not None for v in ranged):
            raise ValueError("give either 'z' or 'z_start/z_stop/n_z', not both")
        if self.z is None and any(v is not None for v in ranged) and not all(v is not None for v in ranged):
            raise ValueError("'z_start', 'z_stop' and 'n_z' must be given together")
        if self.n_z is not None and self.n_z < 1:
            raise ValueError("n_z must be >= 1")
        if self.z is not None and any(v < 0 for v in self.z):
            raise ValueError("z values must be >= 0")
        return self

    def positions(self) -> Optional[List[float]]:
        if self.z is not None:
            return [float(v) for v in self.z]
        if self.n_z is not None:
            return [float(v) for v in np.linspace(self.z_start, self.z_stop, self.n_z)]
        return None


class WindowChoice(_Strict):
    kind: Literal[2, 3]
    alpha: float


class FigureModel(_Strict):
    """Per-figure variations; unset entries fall back to the built-in defaults."""

    windows: Optional[List[WindowChoice]] = None
    omega0_values: Optional[List[float]] = None
    n1_values: Optional[List[float]] = None
    z_values: Optional[List[float]] = None
    output_stride: Optional[int] = None


class ExperimentConfig(_Strict):
    medium: MediumModel = Field(default_factory=MediumModel)
    source: SourceModel = Field(default_factory=SourceModel)
    quadrature: QuadratureModel = Field(default_factory=QuadratureModel)
    receiver: ReceiverModel = Field(default_factory=ReceiverModel)
    sweep: SweepModel = Field(default_factory=SweepModel)
    figure: FigureModel = Field(default_factory=FigureModel)
    output_dir: str = "out"
    threads: Union[int, Literal["auto"]] = 1

    @model_validator(mode="after")
    def _domain_checks(self):
        # enforce the domain invariants at load time
        try:
            self.build_medium()
            self.build_source()
            self.build_quadrature()
            self.build_receiver()
            self.build_train()
        except GuidePeakError as exc:
            raise ValueError(str(exc)) from exc
        if isinstance(self.threads, int) and self.threads < 1:
            raise ValueError("threads must be >= 1 or 'auto'")
        return self

    def build_medium(self) -> GuideMedium:
        m = self.medium
        if m.lorentz is not None:
            lorentz = LorentzParams(**m.lorentz.model_dump())
            n1 = lorentz.n1 if m.n1 is None else m.n1
            return GuideMedium(omega_c=m.omega_c, n1=n1, lorentz=lorentz)
        if m.n1 is None:
            raise ConfigError("medium.n1 is required without Lorentz parameters")
        return GuideMedium(omega_c=m.omega_c, n1=m.n1)

    def build_source(self) -> SourceSpec:
        w = self.source.window
        return SourceSpec(self.source.omega0, WindowSpec(w.kind, w.delta_omega, w.alpha))

    def build_train(self) -> Optional[PulseTrain]:
        if not self.source.train:
            return None
        return PulseTrain(self.build_source(), tuple((t.b, t.shift) for t in self.source.train))

    def build_quadrature(self, **overrides) -> QuadratureConfig:
        data = self.quadrature.model_dump()
        if data["t_stop"] is None:
            data.pop("t_stop")
        data.update(overrides)
        return QuadratureConfig(**data)

    def build_receiver(self) -> ReceiverConfig:
        return ReceiverConfig(**self.receiver.model_dump())

    @property
    def n_threads(self) -> int:
        if self.threads == "auto":
            import os

            return os.cpu_count() or 1
        return int(self.threads)


def _format_errors(exc: ValidationError) -> str:
    lines = []
    for err in exc.errors():
        loc = ".".join(str(p) for p in err["loc"]) or "<root>"
        lines.append(f"{loc}: {err['msg']}")
    return "; ".join(lines)


def config_from_dict(data: dict) -> ExperimentConfig:
    if isinstance(data, dict) and "config" in data and isinstance(data["config"], dict):
        data = data["config"]
    try:
        return ExperimentConfig.model_validate(data or {})
    except ValidationError as exc:
        raise ConfigError(_format_errors(exc)) from exc


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        data = json.loads(text) if path.suffix == ".json" else yaml.safe_load(text)
    except (ValueError, yaml.YAMLError) as exc:
        raise ConfigError(f"cannot parse config {path}: {exc}") from exc
    if data is not None and not isinstance(data, dict):
        raise ConfigError("config root must be a mapping")
    return config_from_dict(data)


REFERENCE_TRAIN = [
    {"b": 1.0, "shift": 0.0},
    {"b": -0.5, "shift": 80e-6},
    {"b": 1.0, "shift": 150e-6},
    {"b": -0.5, "shift": 240e-6},
]


def default_config(name: str) -> ExperimentConfig:
    """Reference parameters for a figure or experiment name."""
    base = {"medium": {"omega_c": 9.5e9, "n1": 0.2e6}}
    if name in ("fig1", "fig2", "fig3", "validate"):
        base["source"] = {"omega0": 9.49e9, "window": {"kind": 3, "delta_omega": 0.8e9, "alpha": 0.8e9}}
        if name == "fig3":
            base["sweep"] = {"z_start": 10.0, "z_stop": 400.0, "n_z": 40}
    elif name == "fig4":
        base["source"] = {"omega0": 9.49e9, "window": {"kind": 3, "delta_omega": 2.0e9, "alpha": 0.4e9}}
        base["sweep"] = {"z_start": 10.0, "z_stop": 600.0, "n_z": 60}
    elif name in ("fig5", "fig6", "decode"):
        base["source"] = {
            "omega0": 9.49e9,
            "window": {"kind": 3, "delta_omega": 2.0e9, "alpha": 0.4e9},
            "train": REFERENCE_TRAIN,
        }
        base["receiver"] = {"noise_floor": 0.5e-5, "hold_time": 0.1e-6}
        if name == "fig6":
            base["sweep"] = {"z_start": 150.0, "z_stop": 350.0, "n_z": 9}
        else:
            base["sweep"] = {"z": [200.0, 250.0, 300.0]}
    else:
        raise ConfigError(f"unknown experiment {name!r}")
    return config_from_dict(base)
