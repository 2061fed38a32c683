import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from cyclorate.windows import (
    TailSums,
    WindowSpec,
    leakage_bound,
    lobe_peak,
    tail_sums,
    transform_at_zero,
    window_transform,
    window_value,
)

T = 211.0
SPECS = [WindowSpec(k, T) for k in ("rectangle", "hann", "cos4")]


def test_window_values_basic():
    hann = WindowSpec("hann", T)
    assert window_value(hann, T / 2) == pytest.approx(1.0)
    assert window_value(hann, 0.0) == 0.0
    assert window_value(hann, T) == pytest.approx(0.0, abs=1e-30)
    assert window_value(hann, -1.0) == 0.0
    assert window_value(hann, T + 1.0) == 0.0
    cos4 = WindowSpec("cos4", T)
    assert window_value(cos4, T / 4) == pytest.approx(0.25)
    rect = WindowSpec("rectangle", T)
    assert window_value(rect, 0.0) == 1.0
    assert window_value(rect, T) == 1.0
    assert window_value(rect, T + 0.001) == 0.0


def test_window_values_bounded():
    t = np.linspace(-10, T + 10, 5000)
    for spec in SPECS:
        vals = window_value(spec, t)
        assert vals.min() >= 0.0
        assert vals.max() <= 1.0


def test_transform_special_points():
    hann = WindowSpec("hann", T)
    assert window_transform(hann, 0.0) == pytest.approx(T / 2)
    assert window_transform(hann, 1 / T) == pytest.approx(-T / 4)
    assert window_transform(hann, -1 / T) == pytest.approx(-T / 4)
    for k in range(2, 8):
        assert abs(window_transform(hann, k / T)) < 1e-12 * T
    rect = WindowSpec("rectangle", T)
    assert window_transform(rect, 0.0) == pytest.approx(T)
    cos4 = WindowSpec("cos4", T)
    assert window_transform(cos4, 0.0) == pytest.approx(3 * T / 8)
    assert window_transform(cos4, 1 / T) == pytest.approx(-T / 4)
    assert window_transform(cos4, 2 / T) == pytest.approx(T / 16)
    for k in range(3, 9):
        assert abs(window_transform(cos4, k / T)) < 1e-12 * T


def test_transform_near_singular_points_are_smooth():
    # values within the singular guard band interpolate smoothly
    hann = WindowSpec("hann", T)
    for base in (1.0, -1.0):
        eps = np.array([-1e-6, -1e-9, 0.0, 1e-9, 1e-6])
        vals = window_transform(hann, (base + eps) / T)
        assert np.all(np.isfinite(vals.real)) and np.all(np.isfinite(vals.imag))
        spread = np.abs(vals - vals[2]).max()
        assert spread < 1e-4 * T
    cos4 = WindowSpec("cos4", T)
    for base in (1.0, -1.0, 2.0, -2.0):
        vals = window_transform(cos4, (base + np.array([-1e-8, 0, 1e-8])) / T)
        assert np.abs(vals - vals[1]).max() < 1e-6 * T


@pytest.mark.parametrize("kind", ["rectangle", "hann", "cos4"])
def test_transform_matches_quadrature(kind):
    spec = WindowSpec(kind, T)
    rng = np.random.default_rng(hashable := 42)
    nus = rng.uniform(-50 / T, 50 / T, 200)
    for nu in nus:
        re = quad(lambda t: window_value(spec, t) * math.cos(2 * math.pi * nu * t),
                  0, T, limit=300)[0]
        im = quad(lambda t: -window_value(spec, t) * math.sin(2 * math.pi * nu * t),
                  0, T, limit=300)[0]
        assert abs(window_transform(spec, nu) - complex(re, im)) < 1e-8 * T


@given(st.floats(-100.0, 100.0))
@settings(max_examples=80, deadline=None)
def test_conjugate_symmetry(x):
    nu = x / T
    for spec in SPECS:
        assert window_transform(spec, -nu) == pytest.approx(
            np.conj(window_transform(spec, nu)), abs=1e-12 * T)


def test_hann_quadratic_envelope():
    # for |T nu| <= 1/2: (1/2)(1 - 1.5 x^2) <= |w~|/T <= (1/2)(1 - 0.25 x^2)
    spec = WindowSpec("hann", T)
    x = np.linspace(-0.5, 0.5, 401)
    mag = np.abs(window_transform(spec, x / T)) / T
    lower = 0.5 * (1 - 1.5 * x**2)
    upper = 0.5 * (1 - 0.25 * x**2)
    assert np.all(mag >= lower - 1e-12)
    assert np.all(mag <= upper + 1e-12)


def test_hann_sidelobe_peak_bounds():
    # 32T/(105 pi k^3) < peak_k < T/(2 pi k^3) for 2 <= k <= 50
    for k in range(2, 51):
        peak = lobe_peak("hann", k)
        assert 32 / (105 * math.pi * k**3) < peak < 1 / (2 * math.pi * k**3)


def test_hann_tail_sums_match_printed_intervals():
    ts = tail_sums("hann")
    assert 0.02843 < ts.s1 < 0.02844
    assert 0.00464 < ts.s2 < 0.00465
    assert ts.s1 > ts.s2 > 0


def test_tail_sums_bracket():
    for kind, a, g in [("hann", 2.0, 4.0), ("hann", 3.0, 6.0), ("cos4", 3.0, 6.0)]:
        ts = tail_sums(kind, a, g)
        assert ts.s1_lower <= ts.s1
        assert ts.s2_lower <= ts.s2
        assert ts.s1 - ts.s1_lower < 1e-5
        assert ts.s2 - ts.s2_lower < 1e-5


def test_tail_sums_rectangle_rejected():
    with pytest.raises(ValueError, match="diverge"):
        tail_sums("rectangle")


def test_tail_sums_cached_instance():
    assert tail_sums("hann") is tail_sums("hann")


def test_cos4_implies_wide_dynamic_range_at_gap6():
    # the gap-6 geometry admits a dynamic range above 100 under cos4
    ts = tail_sums("cos4", 3.0, 6.0)
    w0 = 0.375
    denom = ts.s2 + ts.s1 * max(ts.s1, w0 + 0.5 * (ts.s1 + ts.s2)) / (w0 - ts.s2)
    assert w0 / denom > 100.0


def test_cos4_inside_main_lobe_rejected():
    with pytest.raises(ValueError, match="main lobe"):
        tail_sums("cos4", 2.0, 4.0)


def test_leakage_bound_values():
    spec = WindowSpec("hann", T)
    s, d = leakage_bound(spec, 4.0)
    assert s == pytest.approx(4 / 64)
    assert d == pytest.approx(29 / 64)
    s6, _ = leakage_bound(spec, 6.0)
    assert s6 == pytest.approx(4 / 216)
    # monotone decreasing toward zero
    gs = np.linspace(4, 400, 100)
    bounds = [leakage_bound(spec, g)[0] for g in gs]
    assert np.all(np.diff(bounds) < 0)
    assert bounds[-1] < 1e-6


def test_leakage_bound_domain():
    spec = WindowSpec("hann", T)
    with pytest.raises(ValueError):
        leakage_bound(spec, 3.9)
    with pytest.raises(ValueError):
        leakage_bound(WindowSpec("rectangle", T), 5.0)


def test_window_spec_validation():
    with pytest.raises(ValueError):
        WindowSpec("boxcar", T)
    with pytest.raises(ValueError):
        WindowSpec("hann", -1.0)


def test_transform_at_zero_consistent():
    for spec in SPECS:
        assert transform_at_zero(spec) == pytest.approx(
            abs(window_transform(spec, 0.0)))
