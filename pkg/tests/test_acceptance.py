"""Acceptance criteria; each test prints one PASS/FAIL line."""

import json
import math
import time

import numpy as np
import pytest

from domfreq import (
    DominanceConfig,
    SinusoidSpec,
    SinusoidTrendModel,
    SynthSpec,
    TimeSeries,
    characteristics,
    dft,
    dominance_report,
    equilibrium_frequency,
    fit_trend_sinusoid,
    gaussian_noise,
    generate,
    period_counts,
    pisarenko_single_tone,
    rank_peaks,
    raw_psd,
    stft,
    track_dominant,
    unwrap_phase,
    welch_psd,
    whiteness_test,
)
from domfreq.cli import main
from domfreq.errors import NumericalError
from domfreq.io import ingest_csv
from domfreq.spectral import welch_layout


@pytest.fixture
def verdict(capsys):
    def report(criterion, ok, detail):
        with capsys.disabled():
            print(f"\n[acceptance {criterion:>2}] {'PASS' if ok else 'FAIL'}: {detail}")
        assert ok, detail

    return report


def test_01_sampling_ledger(verdict):
    start = time.perf_counter()
    c = characteristics(1000, 100.0, 1024)
    pc = period_counts(5.0, c)
    elapsed = time.perf_counter() - start
    ok = (
        c.r_s == 10.0
        and c.f_nyquist == 5.0
        and c.t_step == 0.1
        and c.f_res_nominal == 0.01
        and c.f_max == 5.0
        and pc.period_s == 0.2
        and pc.n_periods == 500.0
        and pc.samples_per_period == 2.0
        and elapsed < 0.1
    )
    verdict(1, ok, f"r_s={c.r_s} f_N={c.f_nyquist} t_s={c.t_step} f_res(1/T_s)={c.f_res_nominal} "
                   f"p_f={pc.period_s} np_f={pc.n_periods} ns_f={pc.samples_per_period} in {elapsed:.4f}s")


def demo(seed):
    return generate(SynthSpec(297, 1000.0, (SinusoidSpec.cosine(1.0, 200.0),), noise_sigma=1.0, seed=seed))


def test_02_demo_pipeline(verdict):
    start = time.perf_counter()
    s = raw_psd(demo(7))
    k = s.argmax()
    hits = 0
    for seed in range(20):
        rep = dominance_report(demo(seed))
        hits += abs(rep.dominant.freq_hz - 200.0) <= 1.0
    elapsed = time.perf_counter() - start
    ok = k == 102 and s.freq_hz[k] == 199.21875 and s.bin_width_hz == 1.953125 and hits >= 18 and elapsed < 1.0
    verdict(2, ok, f"bin {k} at {s.freq_hz[k]} Hz, step {s.bin_width_hz} Hz, "
                   f"refined within 1 Hz for {hits}/20 seeds, {elapsed:.3f}s")


def naive_dft(x):
    n = x.size
    k = np.arange(n)
    phase = (np.outer(k, k) % n) * (-2.0 * np.pi / n)
    return np.exp(1j * phase) @ x


def test_03_dft_correctness(verdict):
    start = time.perf_counter()
    rng = np.random.Generator(np.random.PCG64(3))
    worst = worst_parseval = 0.0
    for n in [2**p for p in range(2, 10)]:
        for _ in range(100):
            x = rng.standard_normal(n)
            X = dft(x, n)
            ref = naive_dft(x)
            worst = max(worst, np.max(np.abs(X - ref)) / np.max(np.abs(ref)))
            e = np.sum(x**2)
            worst_parseval = max(worst_parseval, abs(np.sum(np.abs(X) ** 2) / n - e) / e)
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-9 and worst_parseval <= 1e-9 and elapsed < 5.0
    verdict(3, ok, f"max rel err {worst:.2e}, Parseval {worst_parseval:.2e}, lengths 4..512, {elapsed:.2f}s")


def test_04_subbin_refinement(verdict):
    # n_s = 297 at 1 kHz zero-padded to 512, as in the demo configuration
    start = time.perf_counter()
    rate, n_s = 1000.0, 297
    f_res = rate / 512
    freqs = np.linspace(10 * f_res, rate / 4, 52)[1:-1]
    refined, unrefined = [], []
    t = np.arange(n_s) / rate
    for f in freqs:
        s = raw_psd(TimeSeries(np.sin(2 * np.pi * f * t), rate))
        p = rank_peaks(s)[0]
        refined.append(abs(p.freq_hz - f) / f_res)
        unrefined.append(abs(s.freq_hz[p.bin] - f) / f_res)
    elapsed = time.perf_counter() - start
    ok = max(refined) < 0.15 and max(unrefined) >= 0.4 and elapsed < 5.0
    verdict(4, ok, f"50 tones: refined max {max(refined):.3f} f_res, unrefined max {max(unrefined):.3f} f_res, {elapsed:.2f}s")


def test_05_equilibrium(verdict):
    rng = np.random.Generator(np.random.PCG64(5))
    worst_gap = worst_rel = 0.0
    for _ in range(20):
        n_s = int(rng.integers(2, 1_000_000))
        T_s = float(10 ** rng.uniform(-3, 4))
        c = characteristics(n_s, T_s, 2)
        eq = equilibrium_frequency(c)
        pc = period_counts(eq.f_eq, c)
        root = math.sqrt(n_s)
        worst_gap = max(worst_gap, abs(pc.n_periods - pc.samples_per_period))
        worst_rel = max(worst_rel, abs(pc.n_periods - root) / root, abs(pc.samples_per_period - root) / root)
    ok = worst_gap <= 1e-9 and worst_rel <= 1e-9
    verdict(5, ok, f"20 draws: max |np_f - ns_f| {worst_gap:.1e}, max rel dev from sqrt(n_s) {worst_rel:.1e}")


def test_06_low_frequency_fit(verdict):
    start = time.perf_counter()
    truth = SinusoidTrendModel(2.0, 0.1, 1.5, 0.05, 0.7)
    t = np.arange(100) / 10.0
    half = fit_trend_sinusoid(TimeSeries(truth(t), 10.0))
    d_err = abs(half.model.D - 0.05) / 0.05
    worst = 0.0
    for model, hint in [
        (SinusoidTrendModel(2.0, 0.1, 1.5, 0.5, 0.7), None),
        (SinusoidTrendModel(1.0, 0.5, 2.0, 1.0, 0.3), 0.9),
        (SinusoidTrendModel(-3.0, -0.2, 0.7, 7.3, -2.0), 7.0),
    ]:
        tt = np.arange(400) / 100.0
        x = model(tt)
        fit = fit_trend_sinusoid(TimeSeries(x, 100.0), hint)
        worst = max(worst, np.max(np.abs(fit.model(tt) - x)) / np.max(np.abs(x)))
    elapsed = time.perf_counter() - start
    ok = d_err <= 0.05 and worst <= 1e-6 and elapsed < 10.0
    verdict(6, ok, f"half period D rel err {d_err:.2e}; >=3 periods max sample err {worst:.1e} max|x|; {elapsed:.2f}s")


def test_07_pisarenko(verdict):
    start = time.perf_counter()
    t = np.arange(1024) / 1000.0
    f = pisarenko_single_tone(TimeSeries(np.cos(2 * np.pi * 125.0 * t), 1000.0))
    rel = abs(f - 125.0) / 125.0
    try:
        pisarenko_single_tone(TimeSeries(np.cos(2 * np.pi * 250.0 * t), 1000.0))
        raised = False
    except NumericalError as e:
        raised = "quarter-rate ambiguity" in str(e)
    elapsed = time.perf_counter() - start
    ok = rel <= 0.005 and raised and elapsed < 1.0
    verdict(7, ok, f"rate/8 estimate {f:.4f} Hz (rel err {rel:.2e}); rate/4 raised={raised}; {elapsed:.3f}s")


def test_08_welch_consistency(verdict):
    t = np.arange(4096) / 1000.0
    x = TimeSeries(np.sin(2 * np.pi * 125.0 * t), 1000.0)
    w, r = welch_psd(x), raw_psd(x)
    fw, fr = w.freq_hz[w.argmax()], r.freq_hz[r.argmax()]
    layouts = {n: welch_layout(n).seg_len for n in (64, 297, 1000)}
    expected = {n: math.floor(n / 4.5) for n in layouts}
    ok = abs(fw - fr) <= w.bin_width_hz and layouts == expected
    verdict(8, ok, f"Welch {fw} Hz vs raw {fr} Hz (bin {w.bin_width_hz} Hz); L={layouts}")


def test_09_unwrap_round_trip(verdict):
    rng = np.random.Generator(np.random.PCG64(9))
    worst = 0.0
    diffs_ok = True
    for _ in range(100):
        n = int(rng.integers(2, 2000))
        ramp = rng.uniform(-20, 20) + rng.uniform(-3.1, 3.1) * np.arange(n)
        wrapped = np.pi - np.mod(np.pi - ramp, 2 * np.pi)
        out = unwrap_phase(wrapped)
        shift = out - ramp
        worst = max(worst, float(np.max(np.abs(shift - shift[0]))))
        d = np.diff(out)
        diffs_ok &= bool(np.all(d > -np.pi) and np.all(d <= np.pi))
    ok = worst <= 1e-9 and diffs_ok
    verdict(9, ok, f"100 ramps: max error {worst:.1e} up to a constant; differences in (-pi, pi]: {diffs_ok}")


def test_10_stft_segmentation(verdict, middle_third_tone):
    hop = 50
    g = stft(middle_third_tone, 200, hop)
    tr = track_dominant(g, band=(100.0, 150.0))
    bin_w = g.frames[0].bin_width_hz
    n_seg = len(tr.segments)
    seg = tr.segments[0] if tr.segments else None
    tol = hop / 1000.0 + 1e-9
    bounds_ok = seg is not None and abs(seg.t_start - 1.0) <= tol and abs(seg.t_end - 2.0) <= tol
    active = [p for p in tr.points if seg and seg.t_start <= p.time_s <= seg.t_end]
    freq_ok = bool(active) and all(abs(p.freq_hz - 125.0) <= bin_w for p in active)
    ok = n_seg == 1 and bounds_ok and freq_ok
    verdict(10, ok, f"{n_seg} segment(s) {seg[:2] if seg else None} vs (1.0, 2.0) +/- {hop / 1000} s; "
                    f"per-frame within {bin_w} Hz: {freq_ok}")


def test_11_dominance_negatives(verdict):
    cfg = DominanceConfig(margin=1.3)
    rejected = sum(
        not dominance_report(TimeSeries(gaussian_noise(512, 1.0, seed), 1000.0), cfg).verdicts.margin_ok
        for seed in range(100)
    )
    gauss = whiteness_test(gaussian_noise(1000, 1.0, 11))
    unif = whiteness_test(np.random.Generator(np.random.PCG64(12)).uniform(-1.0, 1.0, 1000))
    ok = rejected >= 90 and gauss.is_gaussian_white and not unif.is_gaussian_white
    verdict(11, ok, f"margin_ok false for {rejected}/100 noise seeds (need >= 90); "
                    f"Gaussian p={gauss.p_value:.3f} accepted={gauss.is_gaussian_white}; "
                    f"uniform p={unif.p_value:.1e} rejected={not unif.is_gaussian_white}")


def test_12_cli_round_trip(verdict, tmp_path, capsys):
    csv = tmp_path / "demo.csv"
    argv = ["synth", "--tone", "1,200,1.5708", "--noise", "1.0", "--seed", "7", "--n", "297", "--rate", "1000"]
    main(argv + ["-o", str(csv)])
    spec = SynthSpec(297, 1000.0, (SinusoidSpec(1.0, 200.0, 1.5708),), noise_sigma=1.0, seed=7)
    err = float(np.max(np.abs(ingest_csv(csv).samples - generate(spec).samples)))
    reports = []
    for name in ("a.json", "b.json"):
        out = tmp_path / name
        main(["analyze", str(csv), "-o", str(out)])
        reports.append(out.read_bytes())
    capsys.readouterr()
    doc = json.loads(reports[0])
    ok = err <= 1e-9 and reports[0] == reports[1] and doc["dominance"]["peaks"][0]["bin"] == 102
    verdict(12, ok, f"round-trip max err {err:.1e}; consecutive reports byte-identical: {reports[0] == reports[1]}")
