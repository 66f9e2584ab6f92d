"""Figure reproduction, the decode experiment and the validity report.

Every runner writes CSV series plus a ``summary.json`` (or ``report.json``)
that embeds the resolved configuration, so a run can be repeated from its
own output.
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, replace
from pathlib import Path
from typing import List, Sequence, Tuple

import numpy as np

from . import __version__
from .asymptotics import approx_field, effect_range, tau_M, tau_Ts_plus, XI_UPPER
from .config import ExperimentConfig
from .errors import (
    CalibrationError,
    ConfigError,
    DomainError,
    GuidePeakError,
    NoPeakError,
    SaddlePeakVanished,
    StructuralError,
)
from .medium import GuideMedium, assumption_margins, penetration_length
from .propagation import QuadratureConfig, field_series, peak_time, sweep, train_series
from .receiver import decode, detect_peaks, simultaneity_report
from .source import SourceSpec, WindowSpec, window_value

__all__ = ["run_figure", "run_decode", "run_validate", "tau_T_curve", "sweep_quadrature"]

DEFAULT_WINDOWS = ((2, 0.8e9), (2, 1.6e9), (3, 0.8e9), (3, 1.6e9))


def _clean(obj):
    """Replace non-finite floats by None so the JSON stays standard."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (float, np.floating)):
        return float(obj) if math.isfinite(obj) else None
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def write_json(path: Path, data: dict) -> Path:
    path.write_text(json.dumps(_clean(data), indent=2, sort_keys=True) + "\n")
    return path


def write_csv(path: Path, header: Sequence[str], columns: Sequence[np.ndarray]) -> Path:
    data = np.column_stack([np.asarray(c, dtype=float) for c in columns])
    np.savetxt(path, data, delimiter=",", header=",".join(header), comments="", fmt="%.17g")
    return path


def _summary_base(name: str, cfg: ExperimentConfig) -> dict:
    return {"experiment": name, "version": __version__, "config": cfg.model_dump(mode="json")}


def sweep_quadrature(cfg: ExperimentConfig, source: SourceSpec, medium: GuideMedium, z_max: float) -> QuadratureConfig:
    """Time window for peak-time sweeps: configured ``t_stop`` or 5/n1 + 3 z/c."""
    if cfg.quadrature.t_stop is not None or cfg.quadrature.n_t is not None:
        return cfg.build_quadrature()
    t_stop = 5.0 / medium.n1 + 3.0 * z_max / medium.c if medium.n1 > 0 else 50e-6
    return cfg.build_quadrature(t_stop=t_stop)


def tau_T_curve(zs, source: SourceSpec, medium: GuideMedium, q: QuadratureConfig, threads: int = 1):
    """Peak time tau_T and height of the exact field for each z (NaN if none)."""

    def one(z):
        ts = field_series(z, source, medium, q)
        try:
            tau, height = peak_time(ts)
        except NoPeakError:
            tau, height = math.nan, math.nan
        return tau, height, ts.meta["residual"]

    return sweep(one, zs, threads)


def _saddle_curve(zs, source, medium):
    out = []
    for z in zs:
        try:
            out.append(tau_Ts_plus(z, source, medium) if z > 0 else math.nan)
        except SaddlePeakVanished:
            out.append(math.nan)
    return out


def _markers(source, medium, delta_omega=None) -> dict:
    try:
        er = effect_range(source, medium, delta_omega=delta_omega)
    except GuidePeakError as exc:
        return {"unavailable": str(exc)}
    return er.to_dict()


# --------------------------------------------------------------------------
# figures


def _fig1(cfg, out):
    dw = cfg.source.window.delta_omega
    windows = _window_choices(cfg)
    span = max(dw + a for _, a in windows) * 1.25
    x = np.linspace(-span, span, 2001)
    header, cols = ["omega_offset"], [x]
    for kind, alpha in windows:
        header.append(f"f_m{kind}_alpha{alpha:.3g}")
        cols.append(window_value(WindowSpec(kind, dw, alpha), x))
    write_csv(out / "windows.csv", header, cols)
    return {"curves": header[1:], "delta_omega": dw}


def _window_choices(cfg) -> List[Tuple[int, float]]:
    if cfg.figure.windows:
        return [(w.kind, w.alpha) for w in cfg.figure.windows]
    return list(DEFAULT_WINDOWS)


def _stride(cfg, n):
    if cfg.figure.output_stride:
        return cfg.figure.output_stride
    return max(1, n // 12000)


def _fig2(cfg, out):
    medium = cfg.build_medium()
    base = cfg.build_source()
    w = base.window
    zs = cfg.figure.z_values or [0.0, 150.0]
    t_stop = cfg.quadrature.t_stop or 6e-6
    results = {}
    for z in zs:
        cols, header = [], ["t_seconds"]
        peaks = {}
        series = {}
        for kind in (2, 3):
            src = SourceSpec(base.omega0, WindowSpec(kind, w.delta_omega, w.alpha))
            # both kinds share the support width, hence the same time grid
            q = cfg.build_quadrature(t_stop=t_stop)
            series[kind] = field_series(z, src, medium, q)
        t = series[3].times
        m1, lo, hi = _sharp_reference(z, t, base, medium)
        stride = _stride(cfg, t.size)
        header += ["abs2_m1_asymptotic", "env_lo", "env_hi", "abs2_m2", "abs2_m3"]
        cols = [t, m1, lo, hi, series[2].abs2, series[3].abs2]
        write_csv(out / f"field_z{z:g}.csv", header, [c[::stride] for c in cols])
        for kind in (2, 3):
            tau, height = peak_time(series[kind])
            peaks[f"m{kind}"] = {"tau_T": tau, "height": height}
        results[f"{z:g}"] = {"peaks": peaks, "residual": max(s.meta["residual"] for s in series.values())}
    return {"positions": zs, "results": results}


def _sharp_reference(z, t, source, medium):
    """|phi|^2 of the sharp source: exact at z = 0, saddle-pole approximation beyond."""
    if z == 0:
        ones = (t >= 0).astype(float)
        nan = np.full(t.shape, np.nan)
        return ones, nan, nan
    m1 = np.zeros(t.shape)
    lo = np.full(t.shape, np.nan)
    hi = np.full(t.shape, np.nan)
    inside = np.flatnonzero(t > z / medium.c)
    for i in inside:
        ev = approx_field(z, float(t[i]), source, medium)
        m1[i] = abs(ev.approx) ** 2
        lo[i], hi[i] = ev.env_lo, ev.env_hi
    return m1, lo, hi


def _positions(cfg, default):
    zs = cfg.sweep.positions()
    return zs if zs is not None else list(default)


def _fig3(cfg, out):
    medium = cfg.build_medium()
    base = cfg.build_source()
    zs = _positions(cfg, np.linspace(10.0, 400.0, 40))
    header, cols = ["z"], [np.asarray(zs)]
    curves = {}
    for kind, alpha in _window_choices(cfg):
        src = SourceSpec(base.omega0, WindowSpec(kind, base.window.delta_omega, alpha))
        q = sweep_quadrature(cfg, src, medium, max(zs))
        res = tau_T_curve(zs, src, medium, q, cfg.n_threads)
        label = f"tau_T_m{kind}_alpha{alpha:.3g}"
        header.append(label)
        cols.append([r[0] for r in res])
        curves[label] = max(r[2] for r in res)
    header.append("tau_Ts_plus")
    cols.append(_saddle_curve(zs, base, medium))
    write_csv(out / "tau_T.csv", header, cols)
    return {"curves": header[1:], "max_residual": curves, "markers": _markers(base, medium)}


def _fig4(cfg, out):
    medium = cfg.build_medium()
    base = cfg.build_source()
    zs = _positions(cfg, np.linspace(10.0, 600.0, 60))
    omega0s = cfg.figure.omega0_values or [9.49e9, 9.499e9, 9.51e9]
    n1s = cfg.figure.n1_values or [0.25e6, 0.2e6, 0.15e6]
    panels = {
        "a": [(w0, medium.n1) for w0 in omega0s],
        "b": [(9.499e9 if cfg.figure.omega0_values is None else omega0s[0], n1) for n1 in n1s],
    }
    summary = {}
    for panel, combos in panels.items():
        header, cols = ["z"], [np.asarray(zs)]
        markers = {}
        for w0, n1 in combos:
            src = SourceSpec(w0, base.window)
            med = GuideMedium(omega_c=medium.omega_c, n1=n1)
            q = sweep_quadrature(cfg, src, med, max(zs))
            res = tau_T_curve(zs, src, med, q, cfg.n_threads)
            label = f"tau_T_omega0_{w0:.6g}_n1_{n1:.3g}"
            header.append(label)
            cols.append([r[0] for r in res])
            markers[label] = _markers(src, med)
            if w0 >= medium.omega_c:
                markers[label]["warning"] = "carrier at or above cut-off: travelling forerunner regime"
        write_csv(out / f"tau_T_panel_{panel}.csv", header, cols)
        summary[panel] = {"curves": header[1:], "markers": markers}
    return summary


def _receiver_events(cfg, zs, train, medium):
    rcv = cfg.build_receiver()
    q = cfg.build_quadrature() if cfg.quadrature.t_stop is not None else cfg.build_quadrature(t_stop=300e-6)

    def one(z):
        ts = train_series(z, train, medium, q)
        rc = rcv if rcv.sample_period is not None else replace(rcv, sample_period=None)
        return ts, detect_peaks(ts, rc)

    return sweep(one, zs, cfg.n_threads)


def _require_train(cfg):
    train = cfg.build_train()
    if train is None:
        raise ConfigError("source.train: a pulse train is required for this experiment")
    return train


def _fig5(cfg, out):
    medium = cfg.build_medium()
    train = _require_train(cfg)
    zs = cfg.figure.z_values or _positions(cfg, [200.0, 250.0, 300.0])
    q = cfg.build_quadrature() if cfg.quadrature.t_stop is not None else cfg.build_quadrature(t_stop=300e-6)
    series = sweep(lambda z: train_series(z, train, medium, q), zs, cfg.n_threads)
    t = series[0].times
    stride = cfg.figure.output_stride or 16
    header = ["t_seconds"] + [f"abs2_z{z:g}" for z in zs]
    write_csv(out / "train_field.csv", header, [c[::stride] for c in [t] + [s.abs2 for s in series]])
    return {"positions": zs, "max_residual": max(s.meta["residual"] for s in series), "stride": stride}


def _fig6(cfg, out):
    medium = cfg.build_medium()
    train = _require_train(cfg)
    zs = _positions(cfg, np.linspace(150.0, 350.0, 9))
    results = _receiver_events(cfg, zs, train, medium)
    n_pulses = len(train.terms)
    header = ["z"] + [f"tau_P_{i + 1}" for i in range(n_pulses)]
    cols = [np.asarray(zs)]
    for i in range(n_pulses):
        cols.append([evs[i].tau_P if i < len(evs) else math.nan for _, evs in results])
    ref = next(((z, evs) for z, (_, evs) in zip(zs, results) if len(evs) == n_pulses), None)
    if ref is not None:
        z_ref, evs_ref = ref
        for i in range(n_pulses):
            header.append(f"light_line_{i + 1}")
            cols.append([evs_ref[i].tau_P + (z - z_ref) / medium.c for z in zs])
    write_csv(out / "tau_P.csv", header, cols)
    counts = {f"{z:g}": len(evs) for z, (_, evs) in zip(zs, results)}
    return {"positions": list(zs), "peak_counts": counts}


_FIGURES = {"fig1": _fig1, "fig2": _fig2, "fig3": _fig3, "fig4": _fig4, "fig5": _fig5, "fig6": _fig6}


def run_figure(name: str, cfg: ExperimentConfig, out_dir) -> dict:
    """Write the data series of one figure under ``out_dir/name``."""
    if name not in _FIGURES:
        raise ConfigError(f"unknown figure {name!r}; choose from {sorted(_FIGURES)}")
    out = Path(out_dir) / name
    out.mkdir(parents=True, exist_ok=True)
    summary = _summary_base(name, cfg)
    summary["results"] = _FIGURES[name](cfg, out)
    write_json(out / "summary.json", summary)
    return summary


# --------------------------------------------------------------------------
# decode experiment


def run_decode(cfg: ExperimentConfig, out_dir) -> Tuple[dict, bool]:
    """Receivers detect, decode and compare peaks. Returns (report, ok)."""
    medium = cfg.build_medium()
    train = _require_train(cfg)
    zs = cfg.sweep.positions()
    if zs is None or len(zs) < 2:
        raise ConfigError("sweep: the decode experiment needs at least 2 receiver positions")
    results = _receiver_events(cfg, zs, train, medium)
    receivers, failures = [], []
    per_receiver = []
    for z, (ts, events) in zip(zs, results):
        entry = {"z": z, "events": [asdict(e) for e in events], "residual": ts.meta["residual"]}
        try:
            msg = decode(events)
            entry.update(bits=msg.text, level_one=msg.level_one, level_zero=msg.level_zero)
        except CalibrationError as exc:
            entry["error"] = str(exc)
            failures.append(f"z={z:g}: {exc}")
        receivers.append(entry)
        per_receiver.append((z, events))
    try:
        sim = simultaneity_report(per_receiver, c=medium.c).to_dict()
        if not sim["passed"]:
            failures.append("a light-relay margin is not positive")
    except StructuralError as exc:
        sim = {"error": str(exc), "passed": False}
        failures.append(str(exc))
    bit_strings = {r.get("bits") for r in receivers}
    if len(bit_strings) != 1 or None in bit_strings:
        failures.append(f"receivers decoded different messages: {sorted(str(b) for b in bit_strings)}")
    ok = not failures
    report = _summary_base("decode", cfg)
    report.update(receivers=receivers, simultaneity=sim, failures=failures, passed=ok)
    out = Path(out_dir) / "decode"
    out.mkdir(parents=True, exist_ok=True)
    write_json(out / "report.json", report)
    return report, ok


# --------------------------------------------------------------------------
# validity report


def run_validate(cfg: ExperimentConfig) -> dict:
    medium = cfg.build_medium()
    source = cfg.build_source()
    warnings = []
    xi = medium.omega_c / source.omega0
    report = _summary_base("validate", cfg)
    report["xi"] = xi
    report["xi_bounds"] = [1.0, XI_UPPER]
    if source.omega0 >= medium.omega_c:
        warnings.append(
            "carrier at or above cut-off (omega0 >= omega_c): a larger travelling peak appears at small z"
        )
    if medium.lorentz is not None and source.window.compact:
        vr = assumption_margins(source.omega0, source.window.half_support, medium.lorentz)
        report["validity"] = vr.to_dict()
        if not vr.valid:
            warnings.append("Lorentz parameters do not satisfy the strong-damping conditions over the window band")
    else:
        report["validity"] = None
    try:
        report["tau_M"] = tau_M(source, medium)
        report["effect_range"] = effect_range(source, medium, noise_floor=cfg.receiver.noise_floor).to_dict()
    except DomainError as exc:
        report["tau_M"] = None
        report["effect_range"] = {"unavailable": str(exc)}
        warnings.append(f"tau_M unavailable: {exc}")
    report["penetration_length"] = {
        "omega0": float(penetration_length(source.omega0, medium)),
        "omega0_plus_delta_omega": float(penetration_length(source.omega0 + source.window.delta_omega, medium)),
    }
    report["warnings"] = warnings
    return report
