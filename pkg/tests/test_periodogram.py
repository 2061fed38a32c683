import io
import math

import numpy as np
import pytest

from cyclorate._nudft import direct_nudft, nudft_point, nudft_uniform
from cyclorate.periodogram import (
    evaluate_periodogram,
    find_peaks,
    region_complement,
    sup_magnitude,
)
from cyclorate.rates import RateModel
from cyclorate.simulate import EventSeries, RngStream, simulate_nhpp
from cyclorate.windows import WindowSpec, window_transform

T = 1000.0


def make_events(n=200, horizon=T, seed=0):
    rng = np.random.default_rng(seed)
    t = np.sort(rng.uniform(1e-6, horizon, n))
    return EventSeries(t, horizon)


def test_fast_path_matches_direct():
    rng = np.random.default_rng(1)
    t = np.sort(rng.uniform(0, T, 1000))
    w = rng.uniform(0, 1, 1000)
    step = 1 / (16 * T)
    freqs = step * np.arange(1000)
    fast = nudft_uniform(t, w, step, 1000)
    direct = direct_nudft(t, w, freqs)
    scale = np.abs(direct).max()
    assert np.abs(fast - direct).max() < 1e-10 * scale


def test_single_event_magnitude():
    ev = EventSeries([T / 2], T)
    grid = evaluate_periodogram(ev, WindowSpec("hann", T), band=0.2)
    assert np.allclose(grid.magnitudes, 1.0 / T, rtol=1e-9)


def test_no_events_zero():
    ev = EventSeries([], T)
    grid = evaluate_periodogram(ev, WindowSpec("hann", T), band=0.2)
    assert np.all(grid.values == 0)
    assert sup_magnitude(grid) == 0.0


def test_rectangle_dc_value():
    ev = make_events(10)
    grid = evaluate_periodogram(ev, WindowSpec("rectangle", T), band=0.1)
    assert grid.values[0] == pytest.approx(10 / T, rel=1e-12)


def test_centralization_removes_dc_peak():
    # evenly spaced events approximate a constant rate; the centralized
    # magnitude at zero is tiny compared with the raw N/T peak
    n = 10_000
    t = (np.arange(n) + 0.5) * (T / n)
    ev = EventSeries(t, T)
    spec = WindowSpec("hann", T)
    raw = evaluate_periodogram(ev, spec, band=0.05)
    cent = evaluate_periodogram(ev, spec, band=0.05, centralized=True)
    assert abs(raw.values[0]) == pytest.approx(n / (2 * T), rel=1e-3)
    assert abs(cent.values[0]) < 1e-3 * (n / T)


def test_centralized_matches_formula():
    ev = make_events(500, seed=3)
    spec = WindowSpec("hann", T)
    raw = evaluate_periodogram(ev, spec, band=0.1)
    cent = evaluate_periodogram(ev, spec, band=0.1, centralized=True)
    correction = ev.mean_rate * window_transform(spec, raw.frequencies) / T
    assert np.allclose(cent.values, raw.values - correction, atol=1e-14)


def test_linearity_of_direct_sum():
    a = make_events(300, seed=5)
    b = make_events(400, seed=6)
    both = EventSeries(np.sort(np.concatenate([a.timestamps, b.timestamps])), T)
    spec = WindowSpec("hann", T)
    ga = evaluate_periodogram(a, spec, band=0.1, method="direct")
    gb = evaluate_periodogram(b, spec, band=0.1, method="direct")
    gab = evaluate_periodogram(both, spec, band=0.1, method="direct")
    assert np.allclose(gab.values, ga.values + gb.values, atol=1e-13)


def test_hermitian_symmetry_via_point_eval():
    ev = make_events(100, seed=9)
    w = np.ones(len(ev))
    for nu in (0.01, 0.037, 0.2):
        plus = nudft_point(ev.timestamps, w, nu)
        minus = nudft_point(ev.timestamps, w, -nu)
        assert minus == pytest.approx(np.conj(plus), rel=1e-12)


def test_grid_invariants():
    ev = make_events(50)
    grid = evaluate_periodogram(ev, WindowSpec("hann", T), band=0.123, oversample=8)
    steps = np.diff(grid.frequencies)
    assert np.allclose(steps, steps[0])
    assert steps[0] == pytest.approx(1 / (8 * T))
    assert grid.frequencies[-1] <= 0.123
    assert len(grid.values) == len(grid.frequencies)


def test_horizon_mismatch_rejected():
    ev = make_events(10, horizon=500.0)
    with pytest.raises(ValueError, match="horizon"):
        evaluate_periodogram(ev, WindowSpec("hann", T), band=0.1)


def test_oversample_validation():
    ev = make_events(10)
    with pytest.raises(ValueError, match="oversample"):
        evaluate_periodogram(ev, WindowSpec("hann", T), band=0.1, oversample=4)


def test_band_validation():
    ev = make_events(10)
    with pytest.raises(ValueError):
        evaluate_periodogram(ev, WindowSpec("hann", T), band=-0.1)
    with pytest.raises(ValueError, match="grid is empty"):
        evaluate_periodogram(ev, WindowSpec("hann", T), band=1e-7)


class _NoiselessGrid:
    """Deterministic periodogram of a pure rate (integral instead of events)."""

    def __init__(self, model, window, band, oversample=16):
        self.window = window
        T = window.horizon
        step = 1 / (oversample * T)
        n = int(band / step) + 1
        self.frequencies = step * np.arange(n)
        self.grid_step = step
        self.centralized = False
        freqs, coeffs = model.complex_coefficients()
        self._freqs = freqs
        self._coeffs = coeffs
        self.values = self._field(self.frequencies)

    def _field(self, nu):
        nu = np.atleast_1d(np.asarray(nu, dtype=float))
        out = np.zeros(nu.shape, dtype=complex)
        for f, c in zip(self._freqs, self._coeffs):
            out += c * window_transform(self.window, nu - f) / self.window.horizon
        return out

    @property
    def magnitudes(self):
        return np.abs(self.values)

    @property
    def horizon(self):
        return self.window.horizon

    @property
    def band(self):
        return float(self.frequencies[-1])

    def exact_magnitude(self, nu):
        return float(np.abs(self._field(nu))[0])


def test_find_peaks_pure_tone_noiseless():
    nu0 = 0.0831
    model = RateModel(10.0, [(nu0, 8.0, 1.3)], band_limit=0.3)
    grid = _NoiselessGrid(model, WindowSpec("hann", T), band=0.3)
    peaks = find_peaks(grid, [(2 / T, 0.3)])
    assert peaks
    assert abs(peaks[0].frequency - nu0) < 1e-3 / T
    assert peaks[0].refined


def test_find_peaks_boundary_excluded():
    # monotone magnitudes within the region produce no stationary peak
    class Rising:
        frequencies = np.linspace(0.0, 1.0, 101)
        values = (np.linspace(0, 1, 101) + 0.1).astype(complex)
        grid_step = 0.01
        centralized = False
        horizon = T
        band = 1.0
        magnitudes = np.abs(values)

        def exact_magnitude(self, nu):
            return float(nu + 0.1)

    assert find_peaks(Rising(), [(0.2, 0.6)]) == []


def test_find_peaks_tie_broken_by_lower_frequency():
    class TwoPeaks:
        frequencies = np.linspace(0.0, 1.0, 11)
        magnitudes = np.array([0, 1, 0, 0, 2, 0, 0, 2, 0, 1, 0], dtype=float)
        values = magnitudes.astype(complex)
        grid_step = 0.1
        centralized = False
        horizon = T
        band = 1.0

    peaks = find_peaks(TwoPeaks(), [(0.0, 1.0)], refine=False)
    assert peaks[0].magnitude == peaks[1].magnitude == 2.0
    assert peaks[0].frequency < peaks[1].frequency


def test_sup_magnitude_refinement_only_increases():
    model = RateModel(10.0, [(0.05, 5.0, 0.3)], band_limit=0.2)
    ev = simulate_nhpp(model, T, RngStream(12))
    grid = evaluate_periodogram(ev, WindowSpec("hann", T), band=0.2)
    raw = grid.magnitudes.max()
    assert sup_magnitude(grid) >= raw
    assert sup_magnitude(grid, refine="parabolic") >= raw
    assert sup_magnitude(grid, refine=None) == raw


def test_region_complement():
    region = [(0.1, 0.5)]
    out = region_complement(region, 0.2, 0.3)
    assert out == [(0.1, 0.2), (0.3, 0.5)]
    assert region_complement(out, 0.0, 0.15) == [(0.15, 0.2), (0.3, 0.5)]
    assert region_complement([(0.1, 0.2)], 0.05, 0.3) == []


def test_csv_export():
    ev = make_events(20)
    grid = evaluate_periodogram(ev, WindowSpec("hann", T), band=0.05)
    buf = io.StringIO()
    grid.to_csv(buf)
    lines = buf.getvalue().strip().splitlines()
    assert lines[0] == "freq,re,im,mag"
    assert len(lines) == len(grid.frequencies) + 1
    row = lines[1].split(",")
    assert float(row[0]) == 0.0
    assert abs(complex(float(row[1]), float(row[2]))) == pytest.approx(float(row[3]))
