"""Transform-domain machinery: DFT, power spectra, STFT, phase, cepstrum.

Normalization conventions
-------------------------
``raw``
    ``|X[k]|^2`` of the (length-adjusted, unwindowed) series, no scaling.
    This is the plain squared-modulus periodogram.
``welch``
    Mean over segments of ``|X_w[k]|^2 / sum(w^2)`` where ``X_w`` is the
    transform of a windowed segment. Dividing by the window energy keeps the
    white-noise level independent of the window shape.

Both are one-sided without doubling: bins ``0 .. n_fft/2`` hold exactly the
values of the full two-sided transform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Sequence

import numpy as np
import numpy.typing as npt

from .errors import DataError, NumericalError
from .preprocess import LengthPolicy, WindowKind, adjust_length, window
from .timebase import (
    FloatArray,
    TimeSeries,
    is_power_of_two,
    next_power_of_two,
)

RAW = "raw"
WELCH = "welch"


@dataclass(frozen=True, eq=False)
class Spectrum:
    """One-sided power spectrum on the grid ``k * rate_hz / n_fft``."""

    power: FloatArray
    freq_hz: FloatArray
    n_fft: int
    rate_hz: float
    source_n_s: int
    phase_rad: FloatArray | None = None
    normalization: str = RAW

    @property
    def bin_width_hz(self) -> float:
        return self.rate_hz / self.n_fft

    @property
    def total_power(self) -> float:
        return float(self.power.sum())

    def argmax(self, dc_exclude: bool = True) -> int:
        """Index of the largest bin; DC is skipped unless ``dc_exclude`` is false."""
        start = 1 if dc_exclude else 0
        return start + int(np.argmax(self.power[start:]))


@dataclass(frozen=True, eq=False)
class Spectrogram:
    frames: tuple[Spectrum, ...]
    frame_times_s: FloatArray
    win_len: int
    hop: int

    def __len__(self) -> int:
        return len(self.frames)

    def power_matrix(self) -> FloatArray:
        """Frames stacked as rows (time x frequency)."""
        return np.vstack([f.power for f in self.frames])


class Cepstrum(NamedTuple):
    quefrency_s: FloatArray
    values: FloatArray


class CepstralPeak(NamedTuple):
    """Best fundamental candidate from the cepstrum.

    ``detected`` is true when the peak stands out from the cepstral
    background by at least the requested prominence; ``freq_hz`` is filled
    either way so callers can inspect weak candidates.
    """

    freq_hz: float
    quefrency_s: float
    value: float
    prominence: float
    detected: bool


def _frequency_grid(n_fft: int, rate_hz: float) -> FloatArray:
    return np.arange(n_fft // 2 + 1) * (rate_hz / n_fft)


def dft(x: npt.ArrayLike, n_fft: int) -> npt.NDArray[np.complex128]:
    """``X[k] = sum_n x[n] exp(-2 pi i k n / n_fft)`` with zero padding to ``n_fft``."""
    if not is_power_of_two(n_fft):
        raise ValueError(f"n_fft must be a power of two, got {n_fft!r}")
    xv = np.asarray(x, dtype=np.float64).ravel()
    if xv.size > n_fft:
        raise ValueError(f"input length {xv.size} exceeds n_fft={n_fft}")
    return np.fft.fft(xv, n_fft)


def _one_sided(
    values: FloatArray, n_fft: int, rate_hz: float, source_n_s: int, *, with_phase: bool = True
) -> Spectrum:
    X = dft(values, n_fft)[: n_fft // 2 + 1]
    return Spectrum(
        power=np.abs(X) ** 2,
        freq_hz=_frequency_grid(n_fft, rate_hz),
        n_fft=n_fft,
        rate_hz=rate_hz,
        source_n_s=source_n_s,
        phase_rad=np.angle(X) if with_phase else None,
        normalization=RAW,
    )


def raw_psd(x: TimeSeries, policy: LengthPolicy | str = LengthPolicy.ZERO_PAD_UP) -> Spectrum:
    """Squared-modulus periodogram after power-of-two length adjustment."""
    if x.n_s < 2:
        raise DataError("spectrum needs at least 2 samples")
    adjusted, n_fft = adjust_length(x, policy)
    return _one_sided(adjusted.samples, n_fft, x.rate_hz, x.n_s)


class WelchLayout(NamedTuple):
    seg_len: int
    hop: int
    n_fft: int


def welch_layout(n_s: int, n_segments: int = 8, overlap: float = 0.5) -> WelchLayout:
    """Segment length, hop and transform length for a Welch estimate.

    ``seg_len = floor(n_s / (1 + (n_segments - 1) (1 - overlap)))`` is the
    longest segment for which ``n_segments`` overlapping pieces fit in the
    series.
    """
    if n_segments < 1:
        raise ValueError("n_segments must be >= 1")
    if not 0 <= overlap < 1:
        raise ValueError("overlap must lie in [0, 1)")
    step = 1 - Fraction(overlap).limit_denominator(10**6)
    seg_len = math.floor(Fraction(n_s) / (1 + (n_segments - 1) * step))
    if seg_len < 4:
        raise DataError(
            f"insufficient length for segmentation: {n_s} samples into {n_segments} segments"
        )
    hop = max(1, math.floor(step * seg_len))
    return WelchLayout(seg_len, hop, next_power_of_two(seg_len))


def welch_psd(
    x: TimeSeries,
    n_segments: int = 8,
    overlap: float = 0.5,
    window_kind: WindowKind | str = WindowKind.HAMMING,
) -> Spectrum:
    """Averaged modified periodogram (8 Hamming-windowed, half-overlapping segments by default)."""
    seg_len, hop, n_fft = welch_layout(x.n_s, n_segments, overlap)
    w = window(seg_len, window_kind)
    energy = float(np.dot(w, w))
    acc = np.zeros(n_fft // 2 + 1)
    for m in range(n_segments):
        seg = x.samples[m * hop : m * hop + seg_len]
        acc += np.abs(dft(seg * w, n_fft)[: n_fft // 2 + 1]) ** 2
    return Spectrum(
        power=acc / (n_segments * energy),
        freq_hz=_frequency_grid(n_fft, x.rate_hz),
        n_fft=n_fft,
        rate_hz=x.rate_hz,
        source_n_s=x.n_s,
        phase_rad=None,
        normalization=WELCH,
    )


def unwrap_phase(phi: Sequence[float] | FloatArray) -> FloatArray:
    """Add multiples of 2 pi so successive differences fall in ``(-pi, pi]``."""
    p = np.asarray(phi, dtype=np.float64).ravel()
    if p.size < 2:
        return p.copy()
    d = np.diff(p)
    # pi - ((pi - d) mod 2pi) lies in (-pi, pi]
    wrapped = np.pi - np.mod(np.pi - d, 2.0 * np.pi)
    turns = np.round((wrapped - d) / (2.0 * np.pi))
    out = p.copy()
    out[1:] += 2.0 * np.pi * np.cumsum(turns)
    return out


def stft(
    x: TimeSeries,
    win_len: int,
    hop: int,
    window_kind: WindowKind | str = WindowKind.HAMMING,
) -> Spectrogram:
    """Short-time power spectra of windowed slices ``[m hop, m hop + win_len)``.

    Only complete frames are produced. Each frame is a raw periodogram at the
    next power of two above ``win_len``; its time stamp is the slice centre.
    """
    if not (1 <= hop <= win_len <= x.n_s):
        raise ValueError(
            f"need 1 <= hop <= win_len <= n_s, got hop={hop}, win_len={win_len}, n_s={x.n_s}"
        )
    n_fft = next_power_of_two(win_len)
    w = window(win_len, window_kind)
    n_frames = (x.n_s - win_len) // hop + 1
    frames = tuple(
        _one_sided(x.samples[m * hop : m * hop + win_len] * w, n_fft, x.rate_hz, win_len)
        for m in range(n_frames)
    )
    times = x.t0_s + (np.arange(n_frames) * hop + win_len / 2.0) / x.rate_hz
    return Spectrogram(frames, times, int(win_len), int(hop))


def mean_frequency(s: Spectrum) -> float:
    """Power-weighted mean frequency (spectral centroid), DC included."""
    total = s.total_power
    if not total > 0:
        raise NumericalError("empty spectrum: total power is zero")
    return float(np.dot(s.freq_hz, s.power) / total)


def real_cepstrum(x: TimeSeries, n_fft: int | None = None) -> Cepstrum:
    """Inverse transform of the floored log power spectrum.

    The floor is ``1e-12 * max(power)`` so empty bins do not produce -inf.
    """
    if n_fft is None:
        n_fft = next_power_of_two(x.n_s)
    power = np.abs(dft(x.samples, n_fft)) ** 2
    peak = float(power.max())
    if peak == 0.0:
        raise NumericalError("empty spectrum: cannot take the log of zero power")
    c = np.fft.ifft(np.log(power + 1e-12 * peak)).real
    return Cepstrum(np.arange(n_fft) / x.rate_hz, c)


def cepstral_fundamental(
    x: TimeSeries, n_fft: int | None = None, prominence: float = 8.0
) -> CepstralPeak:
    """Fundamental frequency from the largest cepstral peak.

    The search covers quefrencies from 2 samples up to a third of the
    observation time, so the fundamental repeats at least 3 times. Among
    near-equal maxima the shortest quefrency wins (a pure comb rings at every
    multiple of its period). The candidate counts as detected when its value
    is at least ``prominence`` times the median absolute cepstral value over
    the search range.
    """
    if n_fft is None:
        n_fft = next_power_of_two(x.n_s)
    q, c = real_cepstrum(x, n_fft)
    k_hi = min(int(math.floor(x.n_s / 3.0)), n_fft // 2)
    if k_hi < 2:
        raise DataError("series too short for a cepstral fundamental search")
    region = c[2 : k_hi + 1]
    top = float(region.max())
    tol = 1e-9 * float(np.abs(region).max())
    k = 2 + int(np.flatnonzero(region >= top - tol)[0])
    background = float(np.median(np.abs(region)))
    ratio = c[k] / background if background > 0 else math.inf
    return CepstralPeak(
        freq_hz=x.rate_hz / k,
        quefrency_s=float(q[k]),
        value=float(c[k]),
        prominence=float(ratio),
        detected=bool(ratio >= prominence),
    )
