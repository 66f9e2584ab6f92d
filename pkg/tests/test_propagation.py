import math

import numpy as np
import pytest

from guidepeak import (
    DomainError,
    NoPeakError,
    NumericalToleranceError,
    PulseTrain,
    QuadratureConfig,
    SourceSpec,
    TimeSeries,
    UnsupportedSourceError,
    WindowSpec,
)
from guidepeak.asymptotics import effect_range
from guidepeak.propagation import field_at, field_series, peak_time, sweep, train_series
from guidepeak.source import source_amplitude

Q8 = QuadratureConfig(t_stop=8e-6)


def test_quadrature_config_invariants(fig2_source):
    with pytest.raises(DomainError):
        QuadratureConfig(n_omega=2048)
    with pytest.raises(DomainError):
        QuadratureConfig(tolerance=1e-2)
    with pytest.raises(DomainError):
        QuadratureConfig(pv_scheme="trapezoid")
    nyquist = math.pi / fig2_source.window.half_support
    with pytest.raises(DomainError):
        QuadratureConfig(t_step=1.01 * nyquist).time_grid(fig2_source)
    t0, dt, n = QuadratureConfig(t_stop=1e-6).time_grid(fig2_source)
    assert dt == pytest.approx(nyquist / 4)
    assert t0 + (n - 1) * dt <= 1e-6 < t0 + n * dt


def test_time_series_invariants():
    with pytest.raises(DomainError):
        TimeSeries(0.0, [0.0, 2.0, 1.0], [0, 0, 0])
    with pytest.raises(DomainError):
        TimeSeries(0.0, [0.0, 1.0, 2.5], [0, 0, 0])
    with pytest.raises(DomainError):
        TimeSeries(0.0, [0.0, 1.0], [0])


def test_csv_round_trip(tmp_path, medium, fig2_source):
    ts = field_series(150.0, fig2_source, medium, QuadratureConfig(t_stop=1e-6))
    path = ts.to_csv(tmp_path / "s.csv")
    assert path.read_text().splitlines()[0] == "t_seconds,re,im,abs2"
    back = TimeSeries.from_csv(path)
    assert back.z == 150.0
    assert np.array_equal(back.times, ts.times)
    assert np.array_equal(back.values, ts.values)
    assert back.meta["residual"] == ts.meta["residual"]


def test_unsupported_and_domain(medium, fig2_source, sharp_source):
    with pytest.raises(UnsupportedSourceError):
        field_at(10.0, 1e-6, sharp_source, medium)
    with pytest.raises(UnsupportedSourceError):
        field_series(10.0, sharp_source, medium)
    with pytest.raises(DomainError):
        field_at(-1.0, 1e-6, fig2_source, medium)
    with pytest.raises(DomainError):
        field_series(10.0, fig2_source, medium, QuadratureConfig(pv_scheme="contour-shift"))


def test_nonconvergence_carries_residual(medium, fig2_source):
    q = QuadratureConfig(t_stop=8e-6, tolerance=1e-14, max_doublings=0)
    with pytest.raises(NumericalToleranceError) as info:
        field_series(150.0, fig2_source, medium, q)
    assert info.value.residual > 1e-14


def test_field_at_source_plane(medium, fig2_source):
    for t in (-2e-9, 0.0, 3e-8, 1e-6):
        a = field_at(0.0, t, fig2_source, medium)
        assert abs(a - source_amplitude(fig2_source, t)) <= 1e-10 * max(abs(a), 1e-300)


def test_field_ahead_of_front(medium, fig2_source):
    assert abs(field_at(150.0, 0.4e-6, fig2_source, medium)) ** 2 < 1e-6


def test_field_at_error_estimate(medium, fig2_source):
    value, err = field_at(150.0, 2e-6, fig2_source, medium, return_error=True)
    assert err <= 1e-6 * abs(value)


def test_source_plane_series_shape(fig2_source, medium):
    ts = field_series(0.0, fig2_source, medium, Q8)
    assert ts.abs2[0] == pytest.approx(0.25, abs=1e-6)
    late = ts.abs2[ts.times > 1e-6]
    assert np.all(np.abs(late - 1.0) < 1e-3)


@pytest.mark.parametrize("z", [0.0, 75.0, 220.0])
def test_series_matches_oracle(medium, fig2_source, z):
    rng = np.random.default_rng(int(z) + 1)
    ts = field_series(z, fig2_source, medium, Q8)
    scale = np.max(np.abs(ts.values))
    for i in rng.integers(0, ts.times.size, 5):
        direct = field_at(z, float(ts.times[i]), fig2_source, medium)
        assert abs(ts.values[i] - direct) <= 10 * Q8.tolerance * scale


@pytest.mark.parametrize("kind, alpha", [(2, 0.8e9), (3, 1.6e9)])
def test_grid_refinement_within_residual(medium, kind, alpha):
    src = SourceSpec(9.49e9, WindowSpec(kind, 0.8e9, alpha))
    a = field_series(180.0, src, medium, Q8)
    b = field_series(180.0, src, medium, QuadratureConfig(t_stop=8e-6, n_omega=2 * Q8.n_omega))
    idx = np.random.default_rng(3).integers(0, a.times.size, 10)
    scale = np.max(a.abs2)
    assert np.max(np.abs(a.abs2[idx] - b.abs2[idx])) / scale < a.meta["residual"]


def test_train_linearity(medium):
    src = SourceSpec(9.49e9, WindowSpec(3, 2.0e9, 0.4e9))
    q = QuadratureConfig(t_stop=6e-6)
    train = PulseTrain(src, ((1.0, 0.0), (-0.5, 2e-6)))
    total = train_series(200.0, train, medium, q)
    first = field_series(200.0, src, medium, q)
    second = field_series(200.0, src, medium, QuadratureConfig(t_start=-2e-6, t_step=first.t_step, n_t=first.times.size))
    expected = first.values - 0.5 * second.values
    assert np.max(np.abs(total.values - expected)) <= 1e-12 * np.max(np.abs(expected))


def test_attenuation_monotone_in_flat_region(medium, fig2_source):
    er = effect_range(fig2_source, medium)
    q = QuadratureConfig(t_stop=30e-6)
    heights = [peak_time(field_series(z, fig2_source, medium, q))[1] for z in np.linspace(er.z_min, er.z_max, 6)]
    assert all(b < a for a, b in zip(heights, heights[1:]))


def _synthetic(center, width=0.2e-6, step=1e-8, n=600, height=1.0):
    t = np.arange(n) * step
    return TimeSeries(0.0, t, np.sqrt(height) * np.exp(-((t - center) ** 2) / (2 * width**2)))


def test_peak_time_gaussian():
    ts = _synthetic(2.0e-6 + 3.7e-9)
    tau, h = peak_time(ts)
    assert abs(tau - 2.0037e-6) <= ts.t_step
    assert h == pytest.approx(1.0, rel=1e-3)


def test_peak_time_ties_take_earliest():
    t = np.arange(10) * 1.0
    values = np.array([0, 1, 2, 1, 0, 0, 1, 2, 1, 0], dtype=float)
    tau, _ = peak_time(TimeSeries(0.0, t, values))
    assert tau == pytest.approx(2.0)


def test_peak_time_errors():
    ts = _synthetic(1e-6, height=1e-12)
    with pytest.raises(NoPeakError):
        peak_time(ts, noise_floor=1e-6)
    with pytest.raises(NoPeakError):
        peak_time(ts, t_min=1.0)
    with pytest.raises(DomainError):
        peak_time(ts, t_min=-1.0)


def test_sweep_order_and_thread_independence(medium, fig2_source):
    zs = [300.0, 10.0, 150.0, 75.0]
    one = sweep(lambda z: field_series(z, fig2_source, medium, QuadratureConfig(t_stop=3e-6)).values, zs, 1)
    many = sweep(lambda z: field_series(z, fig2_source, medium, QuadratureConfig(t_stop=3e-6)).values, zs, 4)
    for a, b in zip(one, many):
        assert np.array_equal(a, b)
    assert sweep(lambda x: x * 2, range(20), 3) == [x * 2 for x in range(20)]
