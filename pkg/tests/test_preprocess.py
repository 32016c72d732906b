import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from domfreq import LengthPolicy, TimeSeries, WindowKind, adjust_length, bandpass, detrend_linear, window
from domfreq.errors import DataError

from conftest import tone

BIN = 1000.0 / 512


def normal_equations_line(t, x):
    """Independent oracle: solve the 2x2 normal equations directly."""
    n = len(t)
    m = np.array([[n, t.sum()], [t.sum(), (t * t).sum()]])
    return np.linalg.solve(m, [x.sum(), (t * x).sum()])


def test_detrend_exact_line():
    d = detrend_linear(TimeSeries([1, 2, 3, 4], 1.0))
    np.testing.assert_allclose(d.series.samples, 0.0, atol=1e-15)
    assert d.slope == pytest.approx(1.0)
    assert d.intercept == pytest.approx(1.0)


def test_detrend_constant():
    d = detrend_linear(TimeSeries([5, 5, 5], 1.0))
    np.testing.assert_allclose(d.series.samples, 0.0, atol=1e-15)
    assert d.slope == pytest.approx(0.0, abs=1e-15)
    assert d.intercept == pytest.approx(5.0)


def test_detrend_alternating():
    x = np.array([0.0, 1.0, 0.0, 1.0])
    t = np.arange(4.0)
    a, b = normal_equations_line(t, x)
    d = detrend_linear(TimeSeries(x, 1.0))
    assert (d.intercept, d.slope) == pytest.approx((a, b))
    assert (d.intercept, d.slope) == pytest.approx((0.2, 0.2))
    np.testing.assert_allclose(d.series.samples, [-0.2, 0.6, -0.6, 0.2], atol=1e-15)


def test_detrend_uses_absolute_time():
    x = np.array([3.0, 1.0, 4.0, 1.0, 5.0])
    a = detrend_linear(TimeSeries(x, 2.0, t0_s=0.0))
    b = detrend_linear(TimeSeries(x, 2.0, t0_s=100.0))
    np.testing.assert_allclose(a.series.samples, b.series.samples, atol=1e-12)
    assert a.slope == pytest.approx(b.slope)
    assert b.intercept == pytest.approx(a.intercept - 100.0 * a.slope)


def test_detrend_needs_two_samples():
    with pytest.raises(DataError):
        detrend_linear(TimeSeries([1.0], 1.0))


finite = st.floats(-1e3, 1e3, allow_nan=False)


@given(arrays(np.float64, st.integers(2, 200), elements=finite), st.floats(0.1, 1e3))
def test_detrend_orthogonal_and_idempotent(x, rate):
    ts = TimeSeries(x, rate)
    d = detrend_linear(ts).series
    bound = 1e-8 * ts.n_s * max(1.0, np.max(np.abs(x)))
    assert abs(d.samples.sum()) <= bound
    assert abs(np.dot(d.samples, ts.times())) <= bound * max(1.0, ts.times().max())
    again = detrend_linear(d).series
    np.testing.assert_allclose(again.samples, d.samples, atol=1e-10 * max(1.0, np.max(np.abs(x))))


def test_window_examples():
    np.testing.assert_allclose(window(3, WindowKind.HAMMING), [0.08, 1.0, 0.08], atol=1e-15)
    np.testing.assert_array_equal(window(4, "rectangular"), np.ones(4))
    np.testing.assert_array_equal(window(1, "hamming"), [1.0])


@given(st.integers(1, 2000), st.sampled_from(list(WindowKind)))
def test_window_properties(n, kind):
    w = window(n, kind)
    assert w.shape == (n,)
    assert np.all(w > 0) and np.all(w <= 1.0001)
    np.testing.assert_array_equal(w, w[::-1])


def test_adjust_length_examples():
    x = TimeSeries(np.arange(296.0), 1.0)
    up = adjust_length(x, LengthPolicy.ZERO_PAD_UP)
    down = adjust_length(x, "truncate_down")
    assert up.n_fft == 512 and up.series.n_s == 512
    assert np.all(up.series.samples[296:] == 0)
    assert down.n_fft == 256
    np.testing.assert_array_equal(down.series.samples, np.arange(256.0))
    y = TimeSeries(np.ones(256), 1.0)
    for policy in LengthPolicy:
        adj = adjust_length(y, policy)
        assert adj.n_fft == 256 and adj.series is y


@given(arrays(np.float64, st.integers(2, 300), elements=finite))
def test_zero_pad_preserves_sum(x):
    ts = TimeSeries(x, 1.0)
    assert math.fsum(adjust_length(ts, "zero_pad_up").series.samples) == math.fsum(ts.samples)


def test_bandpass_passband_identity():
    x = tone(102 * BIN, 512, 1000.0)
    y = bandpass(x, 150.0, 250.0)
    assert np.max(np.abs(y.samples - x.samples)) < 1e-6


def test_bandpass_stopband():
    x = tone(102 * BIN, 512, 1000.0)
    assert np.max(np.abs(bandpass(x, 10.0, 100.0).samples)) < 1e-6


def test_bandpass_isolates_component():
    low = tone(26 * BIN, 512, 1000.0, amplitude=0.7)
    high = tone(102 * BIN, 512, 1000.0)
    mix = TimeSeries(low.samples + high.samples, 1000.0)
    y = bandpass(mix, 150.0, 250.0)
    assert np.max(np.abs(y.samples - high.samples)) < 1e-6


@settings(max_examples=30)
@given(arrays(np.float64, st.sampled_from([8, 64, 256]), elements=finite))
def test_bandpass_full_band_identity(x):
    ts = TimeSeries(x, 100.0)
    y = bandpass(ts, 0.0, 50.0)
    np.testing.assert_allclose(y.samples, x, atol=1e-9 * max(1.0, np.max(np.abs(x))))


def test_bandpass_preserves_length_of_odd_series():
    ts = TimeSeries(np.random.default_rng(0).standard_normal(300), 100.0)
    assert bandpass(ts, 5.0, 20.0).n_s == 300


@pytest.mark.parametrize("lo, hi", [(-1.0, 10.0), (20.0, 10.0), (0.0, 600.0)])
def test_bandpass_rejects_bad_band(lo, hi):
    with pytest.raises(ValueError):
        bandpass(tone(100.0, 64, 1000.0), lo, hi)
