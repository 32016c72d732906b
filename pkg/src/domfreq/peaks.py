"""Spectral peaks, dominance validation and time tracking of dominant tones."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from typing import Any, NamedTuple, Sequence

import numpy as np

from .errors import DataError, NumericalError
from .preprocess import LengthPolicy, detrend_linear
from .spectral import Spectrogram, Spectrum, raw_psd
from .timebase import FloatArray, TimeSeries

_TINY = np.finfo(np.float64).tiny


def local_maxima(power: Sequence[float] | FloatArray, include_edges: bool = False) -> list[int]:
    """Indices of strict local maxima.

    A bin qualifies when it rises from its left neighbour and the value then
    falls, possibly after a flat top; for a plateau the leftmost bin is
    reported. End bins are only considered with ``include_edges``.
    """
    p = np.asarray(power, dtype=np.float64)
    n = p.size
    if n < 3:
        raise ValueError("need at least 3 values to look for local maxima")
    out: list[int] = []
    if include_edges and p[0] > p[1]:
        out.append(0)
    i = 1
    while i < n - 1:
        if p[i - 1] < p[i]:
            j = i
            while j + 1 < n and p[j + 1] == p[i]:
                j += 1
            if j + 1 < n and p[j + 1] < p[i]:
                out.append(i)
            i = j + 1
        else:
            i += 1
    if include_edges and p[-1] > p[-2]:
        out.append(n - 1)
    return out


class PeakRefinement(NamedTuple):
    delta_bins: float
    freq_offset_hz: float
    power: float
    flat: bool


def refine_peak(power: Sequence[float] | FloatArray, k: int, bin_width_hz: float) -> PeakRefinement:
    """Sub-bin peak position from a parabola through three log-power values.

    With ``a, b, c`` the log powers at ``k-1, k, k+1``::

        delta = 0.5 (a - c) / (a - 2b + c)        clamped to [-0.5, 0.5]
        peak  = exp(b - 0.25 (a - c) delta)

    A Gaussian-shaped peak is an exact parabola in log power. When the
    curvature is not negative (or ``k`` has no two neighbours) the bin itself
    is returned with ``flat=True``.
    """
    p = np.asarray(power, dtype=np.float64)
    if not 0 <= k < p.size:
        raise IndexError(f"bin {k} outside spectrum of length {p.size}")
    if k == 0 or k == p.size - 1:
        return PeakRefinement(0.0, 0.0, float(p[k]), True)
    a, b, c = np.log(np.maximum(p[k - 1 : k + 2], _TINY))
    curvature = (a + c) - 2.0 * b
    if not curvature < 0:
        return PeakRefinement(0.0, 0.0, float(p[k]), True)
    delta = 0.5 * (a - c) / curvature
    delta = min(0.5, max(-0.5, delta))
    refined = math.exp(b - 0.25 * (a - c) * delta)
    return PeakRefinement(float(delta), float(delta * bin_width_hz), refined, False)


def _half_power_edges(p: FloatArray, k: int) -> tuple[float, float]:
    """Fractional bin positions where power first drops to half of ``p[k]``."""
    thr = p[k] / 2.0
    n = p.size
    if not p[k] > thr:
        # zero (or subnormal) peak: no crossing to interpolate
        return float(k), float(k)
    j = k
    while j > 0 and p[j - 1] > thr:
        j -= 1
    lo = 0.0 if j == 0 else (j - 1) + (thr - p[j - 1]) / (p[j] - p[j - 1])
    j = k
    while j < n - 1 and p[j + 1] > thr:
        j += 1
    hi = float(n - 1) if j == n - 1 else j + (p[j] - thr) / (p[j] - p[j + 1])
    return float(lo), float(hi)


def half_power_band(s: Spectrum, k: int) -> tuple[float, float]:
    """Frequencies where the peak at bin ``k`` falls to half power (amplitude / sqrt 2).

    Crossings are linearly interpolated between straddling bins and capped at
    the ends of the spectrum.
    """
    lo, hi = _half_power_edges(s.power, k)
    f0 = float(s.freq_hz[0])
    return f0 + lo * s.bin_width_hz, f0 + hi * s.bin_width_hz


def _bins_in(lo: float, hi: float) -> tuple[int, int]:
    eps = 1e-9
    return int(math.ceil(lo - eps)), int(math.floor(hi + eps))


@dataclass(frozen=True)
class Peak:
    bin: int
    freq_hz: float
    power: float
    band_lo_hz: float
    band_hi_hz: float
    energy_fraction: float
    bin_power: float
    flat: bool = False

    def as_dict(self) -> dict[str, Any]:
        return asdict(self)


@dataclass(frozen=True)
class _Candidate:
    peak: Peak
    lo_pos: float
    hi_pos: float
    first_bin: int
    last_bin: int

    def overlaps(self, other: "_Candidate") -> bool:
        if self.lo_pos < other.hi_pos and other.lo_pos < self.hi_pos:
            return True
        return self.first_bin <= other.last_bin and other.first_bin <= self.last_bin


def _candidate(s: Spectrum, k: int, total: float, dc_exclude: bool) -> _Candidate:
    if dc_exclude and k == 1:
        # detrending leaves DC near zero; its log would dominate the parabola
        ref = PeakRefinement(0.0, 0.0, float(s.power[k]), True)
    else:
        ref = refine_peak(s.power, k, s.bin_width_hz)
    lo, hi = _half_power_edges(s.power, k)
    first, last = _bins_in(lo, hi)
    energy = float(s.power[first : last + 1].sum())
    f0 = float(s.freq_hz[0])
    w = s.bin_width_hz
    peak = Peak(
        bin=int(k),
        freq_hz=float(s.freq_hz[k]) + ref.freq_offset_hz,
        power=ref.power,
        band_lo_hz=f0 + lo * w,
        band_hi_hz=f0 + hi * w,
        energy_fraction=energy / total if total > 0 else 0.0,
        bin_power=float(s.power[k]),
        flat=ref.flat,
    )
    return _Candidate(peak, lo, hi, first, last)


def rank_peaks(s: Spectrum, k_max: int = 3, dc_exclude: bool = True) -> list[Peak]:
    """The ``k_max`` strongest refined peaks, strongest first.

    A weaker peak whose half-power band overlaps that of a stronger one is
    absorbed by it and dropped from the ranking, so one broad peak cannot
    occupy several ranks.
    """
    if k_max < 1:
        raise ValueError("k_max must be >= 1")
    if s.power.size < 3:
        return []
    total = s.total_power
    cands = [
        _candidate(s, k, total, dc_exclude)
        for k in local_maxima(s.power, include_edges=not dc_exclude)
    ]
    cands.sort(key=lambda c: (-c.peak.power, c.peak.bin))
    accepted: list[_Candidate] = []
    for c in cands:
        if any(c.overlaps(a) for a in accepted):
            continue
        accepted.append(c)
        if len(accepted) == k_max:
            break
    return [c.peak for c in accepted]


# --------------------------------------------------------------------------- residuals


class Removal(NamedTuple):
    residual: TimeSeries
    amplitude: float
    phase: float


def remove_dominant(x: TimeSeries, f: float) -> Removal:
    """Subtract the least-squares sinusoid ``a sin(2 pi f t) + b cos(2 pi f t)``.

    Returns the residual series, ``amplitude = hypot(a, b)`` and
    ``phase = atan2(b, a)`` so the removed component is
    ``amplitude * sin(2 pi f t + phase)``.
    """
    nyquist = x.rate_hz / 2.0
    if not 0 < f < nyquist:
        raise ValueError(f"frequency must lie in (0, {nyquist:g}) Hz, got {f!r}")
    arg = 2.0 * np.pi * f * x.times()
    sn, cs = np.sin(arg), np.cos(arg)
    gram = np.array([[sn @ sn, sn @ cs], [sn @ cs, cs @ cs]])
    rhs = np.array([sn @ x.samples, cs @ x.samples])
    a, b = np.linalg.solve(gram, rhs)
    residual = x.samples - (a * sn + b * cs)
    return Removal(x.with_samples(residual), float(math.hypot(a, b)), float(math.atan2(b, a)))


class Whiteness(NamedTuple):
    statistic: float
    p_value: float
    is_gaussian_white: bool


def whiteness_test(x: Sequence[float] | FloatArray, alpha: float = 0.05) -> Whiteness:
    """Jarque-Bera normality test used as a white-Gaussian-noise screen.

    ``JB = n/6 (S^2 + (K - 3)^2 / 4)`` from the sample skewness ``S`` and
    kurtosis ``K``; under the null it is chi-square with 2 degrees of freedom,
    whose upper tail is ``exp(-JB / 2)``.
    """
    v = np.asarray(x, dtype=np.float64).ravel()
    n = v.size
    if n < 20:
        raise DataError(f"whiteness test needs at least 20 values, got {n}")
    d = v - v.mean()
    m2 = float(np.mean(d**2))
    scale = float(np.max(np.abs(v)))
    if m2 <= (1e-14 * scale) ** 2 or m2 == 0.0:
        raise NumericalError("degenerate sample: zero variance")
    skew = float(np.mean(d**3)) / m2**1.5
    kurt = float(np.mean(d**4)) / m2**2
    jb = n / 6.0 * (skew**2 + (kurt - 3.0) ** 2 / 4.0)
    p = math.exp(-jb / 2.0)
    return Whiteness(jb, p, p > alpha)


# --------------------------------------------------------------------------- dominance


@dataclass(frozen=True)
class DominanceConfig:
    policy: LengthPolicy = LengthPolicy.ZERO_PAD_UP
    k_max: int = 3
    margin: float = 1.3
    min_periods: float = 3.0
    energy_floor: float = 0.2
    dc_exclude: bool = True

    def __post_init__(self) -> None:
        object.__setattr__(self, "policy", LengthPolicy(self.policy))
        if self.k_max < 1:
            raise ValueError("k_max must be >= 1")
        if not self.margin > 0:
            raise ValueError("margin must be positive")
        if self.min_periods < 0:
            raise ValueError("min_periods must be non-negative")
        if not 0 <= self.energy_floor <= 1:
            raise ValueError("energy_floor must lie in [0, 1]")

    def as_dict(self) -> dict[str, Any]:
        d = asdict(self)
        d["policy"] = self.policy.value
        return d


@dataclass(frozen=True)
class Verdicts:
    margin_ok: bool = False
    periods_ok: bool = False
    energy_ok: bool = False

    @property
    def all_ok(self) -> bool:
        return self.margin_ok and self.periods_ok and self.energy_ok


@dataclass(frozen=True, eq=False)
class DominanceReport:
    """Dominant frequency candidates with every metric behind the verdicts.

    ``margin_ratio`` is the dominant refined power over the largest power
    outside its half-power band. ``snr_db`` is a power ratio in decibels:
    energy inside that band over energy outside it. Both exclude the DC bin
    when ``config.dc_exclude`` is set.
    """

    peaks: tuple[Peak, ...]
    margin_ratio: float
    period_count: float
    snr_db: float
    whiteness_statistic: float | None
    whiteness_p: float | None
    verdicts: Verdicts
    config: DominanceConfig
    trend_intercept: float
    trend_slope: float
    spectrum: Spectrum | None = field(default=None, repr=False)

    @property
    def dominant(self) -> Peak | None:
        return self.peaks[0] if self.peaks else None

    @property
    def energy_fraction(self) -> float:
        return self.peaks[0].energy_fraction if self.peaks else 0.0

    def as_dict(self) -> dict[str, Any]:
        return {
            "dominant_hz": self.dominant.freq_hz if self.dominant else None,
            "peaks": [p.as_dict() for p in self.peaks],
            "margin_ratio": self.margin_ratio,
            "period_count": self.period_count,
            "energy_fraction": self.energy_fraction,
            "snr_db": self.snr_db,
            "whiteness_statistic": self.whiteness_statistic,
            "whiteness_p": self.whiteness_p,
            "verdicts": asdict(self.verdicts),
            "trend": {"intercept": self.trend_intercept, "slope": self.trend_slope},
            "spectrum_normalization": self.spectrum.normalization if self.spectrum else None,
            "config": self.config.as_dict(),
        }


def _ratio_db(num: float, den: float) -> float:
    if den > 0 and num > 0:
        return 10.0 * math.log10(num / den)
    if num > 0:
        return math.inf
    return -math.inf


def dominance_report(
    x: TimeSeries,
    config: DominanceConfig | None = None,
    spectrum: Spectrum | None = None,
) -> DominanceReport:
    """Detrend, estimate the spectrum, rank peaks and judge the dominant one.

    ``spectrum`` replaces the default raw periodogram of the detrended series
    (e.g. with a Welch estimate). Verdicts:

    * ``margin_ok``: ``margin_ratio >= config.margin``
    * ``periods_ok``: ``T_s * f_dominant >= config.min_periods``
    * ``energy_ok``: dominant band energy fraction ``>= config.energy_floor``

    Metrics are reported even when verdicts fail. With no peaks at all the
    report has an empty ranking and every verdict false.
    """
    config = config or DominanceConfig()
    if x.n_s < 8:
        raise DataError(f"dominance analysis needs at least 8 samples, got {x.n_s}")
    det = detrend_linear(x)
    s = spectrum if spectrum is not None else raw_psd(det.series, config.policy)
    peaks = rank_peaks(s, config.k_max, config.dc_exclude)
    if not peaks:
        return DominanceReport(
            peaks=(),
            margin_ratio=math.nan,
            period_count=math.nan,
            snr_db=math.nan,
            whiteness_statistic=None,
            whiteness_p=None,
            verdicts=Verdicts(),
            config=config,
            trend_intercept=det.intercept,
            trend_slope=det.slope,
            spectrum=s,
        )

    dom = peaks[0]
    lo, hi = _half_power_edges(s.power, dom.bin)
    first, last = _bins_in(lo, hi)
    inside = np.zeros(s.power.size, dtype=bool)
    inside[first : last + 1] = True
    outside = ~inside
    if config.dc_exclude:
        outside[0] = False
    out_max = float(s.power[outside].max()) if outside.any() else 0.0
    margin_ratio = dom.power / out_max if out_max > 0 else math.inf
    snr_db = _ratio_db(float(s.power[inside].sum()), float(s.power[outside].sum()))
    period_count = x.duration_s * dom.freq_hz

    w_stat = w_p = None
    if 0 < dom.freq_hz < x.rate_hz / 2.0 and x.n_s >= 20:
        residual = remove_dominant(det.series, dom.freq_hz).residual
        try:
            w = whiteness_test(residual.samples)
        except NumericalError:
            pass
        else:
            w_stat, w_p = w.statistic, w.p_value

    verdicts = Verdicts(
        margin_ok=bool(margin_ratio >= config.margin),
        periods_ok=bool(period_count >= config.min_periods),
        energy_ok=bool(dom.energy_fraction >= config.energy_floor),
    )
    return DominanceReport(
        peaks=tuple(peaks),
        margin_ratio=float(margin_ratio),
        period_count=float(period_count),
        snr_db=float(snr_db),
        whiteness_statistic=w_stat,
        whiteness_p=w_p,
        verdicts=verdicts,
        config=config,
        trend_intercept=det.intercept,
        trend_slope=det.slope,
        spectrum=s,
    )


# --------------------------------------------------------------------------- tracking


class TrackPoint(NamedTuple):
    time_s: float
    freq_hz: float
    power: float
    band_energy: float


class Segment(NamedTuple):
    t_start: float
    t_end: float
    mean_freq_hz: float


class Track(NamedTuple):
    points: tuple[TrackPoint, ...]
    segments: tuple[Segment, ...]


def track_dominant(
    g: Spectrogram,
    band: tuple[float, float] | None = None,
    threshold_fraction: float = 0.5,
) -> Track:
    """Follow the strongest in-band frequency through a spectrogram.

    Each frame reports its refined in-band maximum. Segments are maximal runs
    of frames whose in-band energy reaches ``threshold_fraction`` of the
    largest in-band frame energy; their bounds are the centres of the first
    and last frames of the run.
    """
    if len(g) < 1:
        raise ValueError("spectrogram has no frames")
    if not 0 < threshold_fraction <= 1:
        raise ValueError("threshold_fraction must lie in (0, 1]")
    freqs = g.frames[0].freq_hz
    if band is None:
        mask = np.ones(freqs.size, dtype=bool)
    else:
        f_lo, f_hi = band
        if not f_lo < f_hi:
            raise ValueError("band must satisfy f_lo < f_hi")
        mask = (freqs >= f_lo) & (freqs <= f_hi)
        if not mask.any():
            raise ValueError("band contains no frequency bins")
    idx = np.flatnonzero(mask)

    points: list[TrackPoint] = []
    for t, frame in zip(g.frame_times_s, g.frames):
        p = frame.power
        energy = float(p[idx].sum())
        if energy <= 0:
            points.append(TrackPoint(float(t), math.nan, 0.0, 0.0))
            continue
        k = int(idx[np.argmax(p[idx])])
        freq, power = float(freqs[k]), float(p[k])
        if 0 < k < p.size - 1 and p[k - 1] <= p[k] >= p[k + 1]:
            ref = refine_peak(p, k, frame.bin_width_hz)
            freq += ref.freq_offset_hz
            power = ref.power
        points.append(TrackPoint(float(t), freq, power, energy))

    energies = np.array([pt.band_energy for pt in points])
    top = float(energies.max())
    segments: list[Segment] = []
    if top > 0:
        active = energies >= threshold_fraction * top
        m = 0
        while m < active.size:
            if not active[m]:
                m += 1
                continue
            start = m
            while m + 1 < active.size and active[m + 1]:
                m += 1
            run = points[start : m + 1]
            segments.append(
                Segment(run[0].time_s, run[-1].time_s, float(np.mean([r.freq_hz for r in run])))
            )
            m += 1
    return Track(tuple(points), tuple(segments))
