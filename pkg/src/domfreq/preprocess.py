"""Conditioning applied before spectral estimation."""

from __future__ import annotations

import enum
from typing import NamedTuple

import numpy as np

from .errors import DataError
from .timebase import FloatArray, TimeSeries, next_power_of_two, prev_power_of_two


class WindowKind(str, enum.Enum):
    RECTANGULAR = "rectangular"
    HAMMING = "hamming"


class LengthPolicy(str, enum.Enum):
    ZERO_PAD_UP = "zero_pad_up"
    TRUNCATE_DOWN = "truncate_down"


class Detrended(NamedTuple):
    series: TimeSeries
    intercept: float
    slope: float


class Adjusted(NamedTuple):
    series: TimeSeries
    n_fft: int


def detrend_linear(x: TimeSeries) -> Detrended:
    """Remove the least-squares line ``a + b t`` fitted against absolute time.

    ``intercept`` is the value of the line at ``t = 0`` and ``slope`` is in
    signal units per second.
    """
    if x.n_s < 2:
        raise DataError("detrending needs at least 2 samples")
    t = x.times()
    t_mean = t.mean()
    tc = t - t_mean
    xv = x.samples
    x_mean = xv.mean()
    slope = float(np.dot(tc, xv - x_mean) / np.dot(tc, tc))
    intercept = float(x_mean - slope * t_mean)
    residual = (xv - x_mean) - slope * tc
    return Detrended(x.with_samples(residual), intercept, slope)


def window(n: int, kind: WindowKind | str = WindowKind.HAMMING) -> FloatArray:
    """Window weights of length ``n``.

    Hamming uses the classic 0.54/0.46 coefficients, symmetric form; a
    single-point window is ``[1]``.
    """
    if n < 1:
        raise ValueError("window length must be >= 1")
    kind = WindowKind(kind)
    if kind is WindowKind.RECTANGULAR or n == 1:
        return np.ones(n)
    k = np.arange(n)
    w = 0.54 - 0.46 * np.cos(2.0 * np.pi * k / (n - 1))
    # enforce exact symmetry against cos rounding
    half = n // 2
    w[n - half:] = w[:half][::-1]
    return w


def adjust_length(x: TimeSeries, policy: LengthPolicy | str = LengthPolicy.ZERO_PAD_UP) -> Adjusted:
    """Zero-pad up to, or truncate down to, a power-of-two length."""
    if x.n_s < 2:
        raise DataError("length adjustment needs at least 2 samples")
    policy = LengthPolicy(policy)
    if policy is LengthPolicy.ZERO_PAD_UP:
        n_fft = next_power_of_two(x.n_s)
    else:
        n_fft = prev_power_of_two(x.n_s)
    if n_fft == x.n_s:
        return Adjusted(x, n_fft)
    if n_fft > x.n_s:
        y = np.concatenate([x.samples, np.zeros(n_fft - x.n_s)])
    else:
        y = x.samples[:n_fft]
    return Adjusted(x.with_samples(y), n_fft)


def bandpass(x: TimeSeries, f_lo: float, f_hi: float) -> TimeSeries:
    """Keep only spectral content with ``f_lo <= |f| <= f_hi``.

    The series is zero-padded to a power of two, transformed, masked
    symmetrically (edges inclusive), inverse transformed and cropped back to
    its original length.
    """
    nyquist = x.rate_hz / 2.0
    if not (0 <= f_lo < f_hi <= nyquist):
        raise ValueError(f"band must satisfy 0 <= f_lo < f_hi <= {nyquist:g} Hz")
    n = x.n_s
    n_fft = next_power_of_two(n)
    spectrum = np.fft.fft(x.samples, n_fft)
    freqs = np.abs(np.fft.fftfreq(n_fft, d=1.0 / x.rate_hz))
    tol = 1e-9 * x.rate_hz / n_fft
    keep = (freqs >= f_lo - tol) & (freqs <= f_hi + tol)
    y = np.fft.ifft(np.where(keep, spectrum, 0.0))
    return x.with_samples(y.real[:n])
