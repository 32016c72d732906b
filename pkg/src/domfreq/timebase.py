"""Sampling characteristics and frequency-bound arithmetic.

Conventions
-----------
The observation time of ``n_s`` samples taken at rate ``r_s`` is
``T_s = n_s / r_s`` (not ``(n_s - 1) / r_s``). Under this convention
``r_s = n_s / T_s`` holds exactly, so 297 samples at 1 kHz span 0.297 s.

Two resolutions appear in practice:

* ``f_res = r_s / n_fft`` is the spacing of the spectral grid actually
  computed with an FFT of length ``n_fft`` (a power of two).
* ``1 / T_s`` is the nominal resolution, reached only when ``n_fft == n_s``.

:class:`SamplingCharacteristics` stores the former in ``f_res``/``f_min`` and
exposes the latter as :attr:`SamplingCharacteristics.f_res_nominal`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping, NamedTuple

import numpy as np
import numpy.typing as npt

from .errors import DataError

FloatArray = npt.NDArray[np.float64]


def is_power_of_two(n: int) -> bool:
    return isinstance(n, (int, np.integer)) and n >= 1 and (int(n) & (int(n) - 1)) == 0


def next_power_of_two(n: int) -> int:
    """Smallest power of two >= ``n`` (``n >= 1``)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return 1 << (int(n) - 1).bit_length()


def prev_power_of_two(n: int) -> int:
    """Largest power of two <= ``n`` (``n >= 1``)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    return 1 << (int(n).bit_length() - 1)


def _require_power_of_two(n_fft: int) -> None:
    if not is_power_of_two(n_fft):
        raise ValueError(f"n_fft must be a power of two, got {n_fft!r}")


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Uniformly sampled real-valued signal.

    Parameters
    ----------
    samples
        Signal values. Stored as a read-only float64 copy.
    rate_hz
        Sampling rate in Hz.
    t0_s
        Time of the first sample in seconds.
    metadata
        Free-form annotations (e.g. the ``aliased`` flag set by the
        synthesizer). Not part of equality or numerics.
    """

    samples: FloatArray
    rate_hz: float
    t0_s: float = 0.0
    metadata: Mapping[str, Any] = field(default_factory=dict)

    def __post_init__(self) -> None:
        x = np.array(self.samples, dtype=np.float64).ravel()
        if x.size == 0:
            raise DataError("no samples")
        if not np.all(np.isfinite(x)):
            raise DataError("samples must be finite")
        rate = float(self.rate_hz)
        if not (rate > 0 and math.isfinite(rate)):
            raise ValueError("rate_hz must be positive")
        x.setflags(write=False)
        object.__setattr__(self, "samples", x)
        object.__setattr__(self, "rate_hz", rate)
        object.__setattr__(self, "t0_s", float(self.t0_s))
        object.__setattr__(self, "metadata", dict(self.metadata))

    @property
    def n_s(self) -> int:
        return int(self.samples.size)

    @property
    def duration_s(self) -> float:
        return self.n_s / self.rate_hz

    @property
    def t_step(self) -> float:
        return 1.0 / self.rate_hz

    def times(self) -> FloatArray:
        """Sample instants ``t0 + k / rate``."""
        return self.t0_s + np.arange(self.n_s, dtype=np.float64) / self.rate_hz

    def with_samples(self, samples: npt.ArrayLike) -> "TimeSeries":
        """Same timing, new values (length may differ)."""
        return TimeSeries(samples, self.rate_hz, self.t0_s, self.metadata)


@dataclass(frozen=True)
class SamplingCharacteristics:
    n_s: int
    T_s: float
    r_s: float
    f_nyquist: float
    t_step: float
    n_fft: int
    f_res: float
    f_min: float
    f_max: float

    @property
    def f_res_nominal(self) -> float:
        """Resolution ``1 / T_s`` obtained when the transform length equals ``n_s``."""
        return 1.0 / self.T_s

    def as_dict(self) -> dict[str, float | int]:
        return {
            "n_s": self.n_s,
            "T_s": self.T_s,
            "r_s": self.r_s,
            "f_nyquist": self.f_nyquist,
            "t_step": self.t_step,
            "n_fft": self.n_fft,
            "f_res": self.f_res,
            "f_min": self.f_min,
            "f_max": self.f_max,
            "f_res_nominal": self.f_res_nominal,
        }


class PeriodCounts(NamedTuple):
    period_s: float
    n_periods: float
    samples_per_period: float


class FrequencyBounds(NamedTuple):
    f_lo: float
    f_hi: float


class Equilibrium(NamedTuple):
    f_eq: float
    count: float


def characteristics(n_s: int, T_s: float, n_fft: int) -> SamplingCharacteristics:
    """Derive the sampling ledger for ``n_s`` samples observed over ``T_s`` seconds.

    Raises
    ------
    DataError
        If fewer than two samples are given.
    ValueError
        If ``T_s`` is not positive or ``n_fft`` is not a power of two.
    """
    if n_s < 2:
        raise DataError(f"insufficient samples: n_s={n_s} (need at least 2)")
    if not T_s > 0:
        raise ValueError("T_s must be positive")
    _require_power_of_two(n_fft)
    r_s = n_s / T_s
    f_nyquist = r_s / 2.0
    f_res = r_s / n_fft
    return SamplingCharacteristics(
        n_s=int(n_s),
        T_s=float(T_s),
        r_s=r_s,
        f_nyquist=f_nyquist,
        t_step=1.0 / r_s,
        n_fft=int(n_fft),
        f_res=f_res,
        f_min=f_res,
        f_max=f_nyquist,
    )


def characteristics_of(x: TimeSeries, n_fft: int | None = None) -> SamplingCharacteristics:
    """Characteristics of a series; ``n_fft`` defaults to the next power of two."""
    if n_fft is None:
        n_fft = next_power_of_two(x.n_s)
    return characteristics(x.n_s, x.duration_s, n_fft)


def period_counts(f: float, chars: SamplingCharacteristics) -> PeriodCounts:
    """Period, number of periods in the window, and samples per period of ``f``."""
    if not f > 0:
        raise ValueError("frequency must be positive")
    n_periods = chars.T_s * f
    return PeriodCounts(1.0 / f, n_periods, chars.n_s / n_periods)


def frequency_bounds(chars: SamplingCharacteristics, min_periods: float = 3.0) -> FrequencyBounds:
    """Range of frequencies the window can support.

    The lower bound requires ``min_periods`` full periods inside the window;
    the upper bound is the Nyquist frequency.
    """
    if min_periods < 1:
        raise ValueError("min_periods must be >= 1")
    f_lo = min_periods / chars.T_s
    f_hi = chars.r_s / 2.0
    if f_lo > f_hi:
        raise DataError(
            f"window too short for requested period support: {f_lo:g} Hz > {f_hi:g} Hz"
        )
    return FrequencyBounds(f_lo, f_hi)


def equilibrium_frequency(chars: SamplingCharacteristics) -> Equilibrium:
    """Frequency where periods-in-window equals samples-per-period (both sqrt(n_s))."""
    root = math.sqrt(chars.n_s)
    return Equilibrium(root / chars.T_s, root)
