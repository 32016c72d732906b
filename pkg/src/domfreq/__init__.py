"""Dominant frequency extraction and validation for finite time series."""

__version__ = "0.1.0"

from .errors import DataError, NumericalError
from .parametric import FitResult, SinusoidTrendModel, fit_trend_sinusoid, nelder_mead, pisarenko_single_tone
from .peaks import (
    DominanceConfig,
    DominanceReport,
    Peak,
    dominance_report,
    half_power_band,
    local_maxima,
    rank_peaks,
    refine_peak,
    remove_dominant,
    track_dominant,
    whiteness_test,
)
from .preprocess import LengthPolicy, WindowKind, adjust_length, bandpass, detrend_linear, window
from .spectral import (
    Spectrogram,
    Spectrum,
    cepstral_fundamental,
    dft,
    mean_frequency,
    raw_psd,
    real_cepstrum,
    stft,
    unwrap_phase,
    welch_psd,
)
from .synth import SinusoidSpec, SynthSpec, gaussian_noise, generate
from .timebase import (
    SamplingCharacteristics,
    TimeSeries,
    characteristics,
    equilibrium_frequency,
    frequency_bounds,
    period_counts,
)

__all__ = [
    "DataError",
    "DominanceConfig",
    "DominanceReport",
    "FitResult",
    "LengthPolicy",
    "NumericalError",
    "Peak",
    "SamplingCharacteristics",
    "SinusoidSpec",
    "SinusoidTrendModel",
    "Spectrogram",
    "Spectrum",
    "SynthSpec",
    "TimeSeries",
    "WindowKind",
    "adjust_length",
    "bandpass",
    "cepstral_fundamental",
    "characteristics",
    "detrend_linear",
    "dft",
    "dominance_report",
    "equilibrium_frequency",
    "fit_trend_sinusoid",
    "frequency_bounds",
    "gaussian_noise",
    "generate",
    "half_power_band",
    "local_maxima",
    "mean_frequency",
    "nelder_mead",
    "period_counts",
    "pisarenko_single_tone",
    "rank_peaks",
    "raw_psd",
    "real_cepstrum",
    "refine_peak",
    "remove_dominant",
    "stft",
    "track_dominant",
    "unwrap_phase",
    "welch_psd",
    "whiteness_test",
    "window",
]
