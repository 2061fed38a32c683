import io
import math

import numpy as np
import pytest
from scipy import stats

from cyclorate.rates import RateModel, SawtoothRate
from cyclorate.simulate import EventSeries, RngStream, simulate_homogeneous, simulate_nhpp


def test_zero_rate_empty():
    ev = simulate_homogeneous(0.0, 100.0, RngStream(1))
    assert len(ev) == 0
    ev = simulate_nhpp(RateModel(0.0), 100.0, RngStream(1))
    assert len(ev) == 0


def test_homogeneous_count_distribution():
    # sample mean of counts over replicates close to rate*T (Poisson oracle)
    rate, T, reps = 10.0, 100.0, 1000
    counts = [len(simulate_homogeneous(rate, T, RngStream(5, i))) for i in range(reps)]
    mean = np.mean(counts)
    se = math.sqrt(rate * T / reps)
    assert abs(mean - rate * T) < 4 * se
    # variance is close to the mean for a Poisson count
    assert 0.8 * rate * T < np.var(counts) < 1.2 * rate * T


def test_homogeneous_determinism():
    a = simulate_homogeneous(7.0, 50.0, RngStream(9, 3))
    b = simulate_homogeneous(7.0, 50.0, RngStream(9, 3))
    assert np.array_equal(a.timestamps, b.timestamps)
    c = simulate_homogeneous(7.0, 50.0, RngStream(9, 4))
    assert not np.array_equal(a.timestamps, c.timestamps)


def test_nhpp_constant_rate_mean_count():
    rate, T, reps = 5.0, 1000.0, 500
    model = RateModel(rate)
    counts = [len(simulate_nhpp(model, T, RngStream(2, i))) for i in range(reps)]
    se = math.sqrt(rate * T / reps)
    assert abs(np.mean(counts) - rate * T) < 4 * se


def test_nhpp_sawtooth_mean_count_matches_cumulative():
    saw = SawtoothRate()
    T, reps = 1000.0, 200
    expected = saw.cumulative(T)
    counts = [len(simulate_nhpp(saw, T, RngStream(3, i))) for i in range(reps)]
    se = math.sqrt(expected / reps)
    assert abs(np.mean(counts) - expected) < 4 * se


def test_nhpp_bad_bound_rejected():
    model = RateModel(5.0, [(0.1, 2.0, 0.0)])
    with pytest.raises(ValueError, match="bound"):
        simulate_nhpp(model, 200.0, RngStream(1), rate_max=3.0)


def test_thinning_gaps_exponential_for_constant_rate():
    # constant-rate thinning is a homogeneous process: KS test on the gaps
    rate, T = 10.0, 1200.0
    ev = simulate_nhpp(RateModel(rate), T, RngStream(17))
    gaps = np.diff(ev.timestamps)
    assert len(gaps) >= 10_000
    res = stats.kstest(gaps[:10_000], "expon", args=(0, 1.0 / rate))
    assert res.pvalue > 1e-3


def test_time_rescaling_gives_unit_poisson():
    model = RateModel(6.0, [(0.05, 3.0, 1.0), (0.21, 2.0, 4.0)])
    ev = simulate_nhpp(model, 2000.0, RngStream(23))
    rescaled = model.cumulative(ev.timestamps)
    gaps = np.diff(rescaled)
    res = stats.kstest(gaps, "expon", args=(0, 1.0))
    assert res.pvalue > 1e-3


def test_nhpp_determinism():
    model = RateModel(6.0, [(0.05, 3.0, 1.0)])
    a = simulate_nhpp(model, 300.0, RngStream(8))
    b = simulate_nhpp(model, 300.0, RngStream(8))
    assert np.array_equal(a.timestamps, b.timestamps)


def test_event_series_invariants():
    with pytest.raises(ValueError, match="strictly increasing"):
        EventSeries([1.0, 1.0, 2.0], 10.0)
    with pytest.raises(ValueError, match="strictly increasing"):
        EventSeries([2.0, 1.0], 10.0)
    with pytest.raises(ValueError):
        EventSeries([0.0, 1.0], 10.0)
    with pytest.raises(ValueError):
        EventSeries([1.0, 11.0], 10.0)
    ev = EventSeries([0.5, 2.5], 10.0)
    assert ev.mean_rate == pytest.approx(0.2)


def test_file_round_trip():
    ev = EventSeries([0.125, 1.0 / 3.0, 9.999999999999], 10.0)
    buf = io.StringIO()
    ev.write(buf)
    back = EventSeries.read(io.StringIO(buf.getvalue()))
    assert back.horizon == ev.horizon
    assert np.array_equal(back.timestamps, ev.timestamps)


def test_file_write_deterministic(tmp_path):
    ev = simulate_homogeneous(3.0, 50.0, RngStream(4))
    p1, p2 = tmp_path / "a.txt", tmp_path / "b.txt"
    ev.write(p1)
    ev.write(p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_file_rejects_non_monotone(tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text("# T=10.0\n1.0\n0.5\n")
    with pytest.raises(ValueError, match="strictly increasing"):
        EventSeries.read(p)


def test_file_rejects_missing_header(tmp_path):
    p = tmp_path / "bad.txt"
    p.write_text("1.0\n2.0\n")
    with pytest.raises(ValueError, match="header"):
        EventSeries.read(p)


def test_rng_stream_children_are_independent():
    base = RngStream(42)
    a = base.child(1).generator().uniform(size=5)
    b = base.child(2).generator().uniform(size=5)
    assert not np.allclose(a, b)
    a2 = RngStream(42).child(1).generator().uniform(size=5)
    assert np.array_equal(a, a2)
