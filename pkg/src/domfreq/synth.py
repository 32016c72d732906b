"""Synthetic test signals: sinusoid mixtures, linear trend and Gaussian noise.

Noise generator
---------------
Normal deviates come from the Box-Muller transform applied to uniform
doubles drawn from numpy's PCG64 bit generator seeded with ``seed``::

    u1, u2 = 1 - U[0, 1), U[0, 1)
    z1 = sqrt(-2 ln u1) cos(2 pi u2)
    z2 = sqrt(-2 ln u1) sin(2 pi u2)

Pairs ``(z1, z2)`` are emitted in order and the stream is cut to length.
PCG64 uniform doubles are platform independent, so a given seed yields the
same sequence everywhere.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError
from .timebase import FloatArray, TimeSeries


class AliasingWarning(UserWarning):
    """A synthesized component sits at or above the Nyquist frequency."""


def wrap_phase(c: float) -> float:
    """Map an angle to ``[-pi, pi)``."""
    w = math.fmod(c + math.pi, 2.0 * math.pi)
    if w < 0:
        w += 2.0 * math.pi
    w -= math.pi
    # fmod rounding can land exactly on +pi
    return -math.pi if w >= math.pi else w


@dataclass(frozen=True)
class SinusoidSpec:
    """``amplitude * sin(2 pi frequency t + phase)``."""

    amplitude: float
    frequency_hz: float
    phase_rad: float = 0.0

    def __post_init__(self) -> None:
        if not self.frequency_hz > 0:
            raise ValueError("sinusoid frequency must be positive")
        object.__setattr__(self, "phase_rad", wrap_phase(float(self.phase_rad)))

    @classmethod
    def cosine(cls, amplitude: float, frequency_hz: float) -> "SinusoidSpec":
        return cls(amplitude, frequency_hz, math.pi / 2)

    def evaluate(self, t: FloatArray) -> FloatArray:
        return self.amplitude * np.sin(2.0 * np.pi * self.frequency_hz * t + self.phase_rad)


@dataclass(frozen=True)
class SynthSpec:
    n_s: int
    rate_hz: float
    components: tuple[SinusoidSpec, ...] = field(default_factory=tuple)
    trend_intercept: float = 0.0
    trend_slope: float = 0.0
    noise_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_s < 2:
            raise DataError("n_s must be >= 2")
        if not self.rate_hz > 0:
            raise ValueError("rate_hz must be positive")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be non-negative")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        object.__setattr__(self, "components", tuple(self.components))


def gaussian_noise(n: int, sigma: float, seed: int) -> FloatArray:
    """Draw ``n`` deviates from N(0, sigma^2) with the Box-Muller generator."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    if sigma == 0:
        return np.zeros(n)
    rng = np.random.Generator(np.random.PCG64(seed))
    n_pairs = (n + 1) // 2
    u = rng.random((n_pairs, 2))
    radius = np.sqrt(-2.0 * np.log1p(-u[:, 0]))
    angle = 2.0 * np.pi * u[:, 1]
    z = np.column_stack((radius * np.cos(angle), radius * np.sin(angle))).ravel()
    return sigma * z[:n]


def generate(spec: SynthSpec) -> TimeSeries:
    """Sample trend + sinusoids + noise at ``t_k = k / rate``.

    Components at or above Nyquist are kept (aliasing is sometimes the point
    of the experiment); the returned series carries ``metadata["aliased"]``
    and an :class:`AliasingWarning` is issued.
    """
    t = np.arange(spec.n_s, dtype=np.float64) / spec.rate_hz
    x = spec.trend_intercept + spec.trend_slope * t
    for comp in spec.components:
        x = x + comp.evaluate(t)
    if spec.noise_sigma > 0:
        x = x + gaussian_noise(spec.n_s, spec.noise_sigma, spec.seed)

    nyquist = spec.rate_hz / 2.0
    aliased = [c.frequency_hz for c in spec.components if c.frequency_hz >= nyquist]
    if aliased:
        warnings.warn(
            f"components at {aliased} Hz are at or above Nyquist ({nyquist:g} Hz)",
            AliasingWarning,
            stacklevel=2,
        )
    return TimeSeries(x, spec.rate_hz, 0.0, {"aliased": bool(aliased)})


def demo_signal(seed: int, sigma: float = 1.0) -> TimeSeries:
    """The classic entry-level case: unit 200 Hz cosine plus noise, 297 samples at 1 kHz."""
    return generate(
        SynthSpec(
            n_s=297,
            rate_hz=1000.0,
            components=(SinusoidSpec.cosine(1.0, 200.0),),
            noise_sigma=sigma,
            seed=seed,
        )
    )
