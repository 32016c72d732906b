import numpy as np
import pytest

from domfreq import SinusoidSpec, SynthSpec, TimeSeries, generate


def tone(freq_hz, n_s, rate_hz, amplitude=1.0, phase=0.0, t0=0.0):
    t = t0 + np.arange(n_s) / rate_hz
    return TimeSeries(amplitude * np.sin(2 * np.pi * freq_hz * t + phase), rate_hz, t0)


@pytest.fixture
def middle_third_tone():
    """3 s at 1 kHz with a 125 Hz tone only between 1 s and 2 s."""
    rate, n = 1000.0, 3000
    t = np.arange(n) / rate
    x = np.where((t >= 1.0) & (t < 2.0), np.sin(2 * np.pi * 125.0 * t), 0.0)
    return TimeSeries(x, rate)


@pytest.fixture
def demo_family():
    def make(seed, sigma=1.0):
        return generate(
            SynthSpec(
                n_s=297,
                rate_hz=1000.0,
                components=(SinusoidSpec.cosine(1.0, 200.0),),
                noise_sigma=sigma,
                seed=seed,
            )
        )

    return make
