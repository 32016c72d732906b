"""Command-line interface.

Subcommands: ``synth``, ``analyze``, ``stft``, ``fit``, ``pisarenko``.

Exit codes
----------
0  success
1  usage error (bad flags, invalid parameter combinations)
2  data error (unreadable/empty/non-uniform input, too few samples)
3  numerical error (singular estimator, empty spectrum, non-finite objective)

Defaults for ``analyze`` and ``stft`` options may be read from a JSON object
given with ``--config`` or via the ``DOMFREQ_CONFIG`` environment variable;
keys are option names with dashes replaced by underscores.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Sequence

from . import __version__
from .errors import DataError, NumericalError
from .io import SCHEMA_VERSION, dumps_report, ingest_csv, read_csv_text, series_to_csv, write_columns
from .parametric import fit_trend_sinusoid, pisarenko_single_tone
from .peaks import DominanceConfig, dominance_report, remove_dominant, track_dominant
from .preprocess import LengthPolicy, WindowKind, bandpass, detrend_linear
from .spectral import cepstral_fundamental, mean_frequency, raw_psd, stft, unwrap_phase, welch_psd
from .synth import SinusoidSpec, SynthSpec, generate
from .timebase import TimeSeries, characteristics_of

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3
CONFIG_ENV = "DOMFREQ_CONFIG"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str) -> None:  # type: ignore[override]
        raise UsageError(f"{self.prog}: {message}")


@dataclass(frozen=True)
class AnalysisConfig:
    """Everything ``analyze`` needs besides the input series."""

    policy: LengthPolicy = LengthPolicy.ZERO_PAD_UP
    welch: bool = False
    segments: int = 8
    overlap: float = 0.5
    k_max: int = 3
    margin: float = 1.3
    min_periods: float = 3.0
    energy_floor: float = 0.2
    dc_exclude: bool = True
    band: tuple[float, float] | None = None
    force_fit: bool = False

    def dominance(self) -> DominanceConfig:
        return DominanceConfig(
            policy=self.policy,
            k_max=self.k_max,
            margin=self.margin,
            min_periods=self.min_periods,
            energy_floor=self.energy_floor,
            dc_exclude=self.dc_exclude,
        )


# --------------------------------------------------------------------------- helpers


def _parse_tone(text: str) -> SinusoidSpec:
    parts = text.split(",")
    if len(parts) not in (2, 3):
        raise argparse.ArgumentTypeError("tone must be AMPLITUDE,FREQ_HZ[,PHASE_RAD]")
    try:
        vals = [float(p) for p in parts]
    except ValueError:
        raise argparse.ArgumentTypeError(f"non-numeric tone {text!r}") from None
    try:
        return SinusoidSpec(*vals)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def _parse_pair(text: str) -> tuple[float, float]:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("expected two comma-separated numbers")
    try:
        return float(parts[0]), float(parts[1])
    except ValueError:
        raise argparse.ArgumentTypeError(f"non-numeric pair {text!r}") from None


def _load(args: argparse.Namespace) -> TimeSeries:
    if args.input == "-":
        return read_csv_text(sys.stdin.read(), args.rate, source="<stdin>")
    return ingest_csv(args.input, args.rate)


def _emit(doc: dict[str, Any], out_path: str | None) -> None:
    text = dumps_report(doc)
    if out_path:
        Path(out_path).write_text(text)
    else:
        sys.stdout.write(text)


def _input_descriptor(x: TimeSeries, source: str) -> dict[str, Any]:
    return {
        "source": source,
        "n_s": x.n_s,
        "rate_hz": x.rate_hz,
        "duration_s": x.duration_s,
        "t0_s": x.t0_s,
    }


def _document(kind: str, **body: Any) -> dict[str, Any]:
    return {
        "schema_version": SCHEMA_VERSION,
        "kind": kind,
        "tool": {"name": "domfreq", "version": __version__},
        **body,
    }


# --------------------------------------------------------------------------- commands


def cmd_synth(args: argparse.Namespace) -> int:
    spec = SynthSpec(
        n_s=args.n,
        rate_hz=args.rate,
        components=tuple(args.tone or ()),
        trend_intercept=args.trend[0],
        trend_slope=args.trend[1],
        noise_sigma=args.noise,
        seed=args.seed,
    )
    x = generate(spec)
    if args.output in (None, "-"):
        series_to_csv(x, sys.stdout)
    else:
        series_to_csv(x, args.output)
    return EXIT_OK


def analysis_config(args: argparse.Namespace) -> AnalysisConfig:
    band = tuple(args.band) if args.band else None
    return AnalysisConfig(
        policy=LengthPolicy(args.policy),
        welch=args.welch,
        segments=args.segments,
        overlap=args.overlap,
        k_max=args.k_max,
        margin=args.margin,
        min_periods=args.min_periods,
        energy_floor=args.energy_floor,
        dc_exclude=not args.include_dc,
        band=band,  # type: ignore[arg-type]
        force_fit=args.fit,
    )


def analyze(x: TimeSeries, cfg: AnalysisConfig, source: str = "") -> tuple[dict[str, Any], dict[str, Any]]:
    """Run the full pipeline; returns the report and the plot-data arrays."""
    if cfg.band is not None:
        x = bandpass(x, *cfg.band)
    dcfg = cfg.dominance()
    det = detrend_linear(x)
    raw = raw_psd(det.series, cfg.policy)
    spectrum = welch_psd(det.series, cfg.segments, cfg.overlap) if cfg.welch else raw
    report = dominance_report(x, dcfg, spectrum=spectrum)
    chars = characteristics_of(x, raw.n_fft)

    dominant = report.dominant
    threshold = cfg.min_periods / x.duration_s
    sub_resolution = dominant is None or dominant.freq_hz < threshold
    fit = None
    if sub_resolution or cfg.force_fit:
        fit = fit_trend_sinusoid(x, dominant.freq_hz if dominant else None)

    try:
        mean_f: float | None = mean_frequency(spectrum)
    except NumericalError:
        mean_f = None
    try:
        cep = cepstral_fundamental(det.series)
        fundamental: dict[str, Any] | None = cep._asdict()
    except (DataError, NumericalError):
        fundamental = None

    doc = _document(
        "analysis",
        input=_input_descriptor(x, source),
        characteristics=chars.as_dict(),
        spectrum={"normalization": spectrum.normalization, "n_fft": spectrum.n_fft},
        dominance=report.as_dict(),
        sub_resolution=sub_resolution,
        fit=fit.as_dict() if fit else None,
        fundamental=fundamental,
        mean_frequency_hz=mean_f,
        config={
            "policy": cfg.policy.value,
            "welch": cfg.welch,
            "segments": cfg.segments,
            "overlap": cfg.overlap,
            "band": list(cfg.band) if cfg.band else None,
            "force_fit": cfg.force_fit,
        },
    )
    plots: dict[str, Any] = {
        "spectrum": (spectrum.freq_hz, spectrum.power),
        "phase": (raw.freq_hz, unwrap_phase(raw.phase_rad)),
    }
    if dominant is not None and 0 < dominant.freq_hz < x.rate_hz / 2:
        res = remove_dominant(det.series, dominant.freq_hz).residual
        plots["residual"] = (res.times(), res.samples)
    return doc, plots


def cmd_analyze(args: argparse.Namespace) -> int:
    cfg = analysis_config(args)
    x = _load(args)
    doc, plots = analyze(x, cfg, source=args.input)
    if args.spectrum_out:
        write_columns(args.spectrum_out, plots["spectrum"], header=("freq_hz", "power"))
    if args.phase_out:
        write_columns(args.phase_out, plots["phase"], header=("freq_hz", "phase_rad"))
    if args.residual_out:
        if "residual" not in plots:
            raise DataError("no dominant frequency to remove")
        write_columns(args.residual_out, plots["residual"], header=("t", "residual"))
    _emit(doc, args.output)
    return EXIT_OK


def cmd_stft(args: argparse.Namespace) -> int:
    x = _load(args)
    g = stft(x, args.win_len, args.hop, WindowKind(args.window))
    track = track_dominant(g, tuple(args.band) if args.band else None, args.threshold)
    if args.track_out:
        write_columns(
            args.track_out,
            [[p.time_s for p in track.points], [p.freq_hz for p in track.points], [p.power for p in track.points]],
            header=("time_s", "freq_hz", "power"),
        )
    doc = _document(
        "stft",
        input=_input_descriptor(x, args.input),
        win_len=g.win_len,
        hop=g.hop,
        n_frames=len(g),
        frames=[[p.time_s, p.freq_hz, p.power] for p in track.points],
        segments=[s._asdict() for s in track.segments],
    )
    _emit(doc, args.output)
    return EXIT_OK


def cmd_fit(args: argparse.Namespace) -> int:
    x = _load(args)
    fit = fit_trend_sinusoid(x, args.hint)
    _emit(_document("fit", input=_input_descriptor(x, args.input), fit=fit.as_dict()), args.output)
    return EXIT_OK


def cmd_pisarenko(args: argparse.Namespace) -> int:
    x = _load(args)
    f = pisarenko_single_tone(x)
    _emit(_document("pisarenko", input=_input_descriptor(x, args.input), frequency_hz=f), args.output)
    return EXIT_OK


# --------------------------------------------------------------------------- parser


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def _add_input(p: argparse.ArgumentParser) -> None:
    p.add_argument("input", help="CSV file (one column: values; two columns: time,value) or '-'")
    p.add_argument("--rate", type=float, help="sampling rate in Hz (required for one-column input)")
    p.add_argument("-o", "--output", help="write the JSON document here instead of stdout")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="domfreq", description="Dominant frequency extraction for time series.")
    parser.add_argument("--version", action="version", version=f"domfreq {__version__}")
    parser.add_argument("--config", help=f"JSON defaults file (overrides ${CONFIG_ENV})")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True

    p = sub.add_parser("synth", help="generate a synthetic series as two-column CSV")
    p.add_argument("--tone", type=_parse_tone, action="append", help="AMPLITUDE,FREQ_HZ[,PHASE_RAD]; repeatable")
    p.add_argument("--trend", type=_parse_pair, default=(0.0, 0.0), help="INTERCEPT,SLOPE")
    p.add_argument("--noise", type=float, default=0.0, help="Gaussian noise sigma")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--n", type=_positive_int, required=True, help="number of samples")
    p.add_argument("--rate", type=float, required=True, help="sampling rate in Hz")
    p.add_argument("-o", "--output", help="output CSV path (default stdout)")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("analyze", help="dominance analysis report")
    _add_input(p)
    p.add_argument("--policy", choices=[e.value for e in LengthPolicy], default=LengthPolicy.ZERO_PAD_UP.value)
    p.add_argument("--welch", action="store_true", help="use the Welch PSD instead of the raw periodogram")
    p.add_argument("--segments", type=_positive_int, default=8)
    p.add_argument("--overlap", type=float, default=0.5)
    p.add_argument("--k-max", type=_positive_int, default=3)
    p.add_argument("--margin", type=float, default=1.3)
    p.add_argument("--min-periods", type=float, default=3.0)
    p.add_argument("--energy-floor", type=float, default=0.2)
    p.add_argument("--include-dc", action="store_true", help="let DC and Nyquist bins compete as peaks")
    p.add_argument("--band", type=float, nargs=2, metavar=("LO", "HI"), help="band-pass before analysis")
    p.add_argument("--fit", action="store_true", help="always run the trend+sinusoid fit")
    p.add_argument("--spectrum-out", help="write freq,power columns")
    p.add_argument("--phase-out", help="write freq,unwrapped phase columns")
    p.add_argument("--residual-out", help="write t,residual after removing the dominant sinusoid")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("stft", help="spectrogram tracking of the dominant frequency")
    _add_input(p)
    p.add_argument("--win-len", type=_positive_int, required=True)
    p.add_argument("--hop", type=_positive_int, required=True)
    p.add_argument("--window", choices=[e.value for e in WindowKind], default=WindowKind.HAMMING.value)
    p.add_argument("--band", type=float, nargs=2, metavar=("LO", "HI"))
    p.add_argument("--threshold", type=float, default=0.5, help="segment energy fraction")
    p.add_argument("--track-out", help="write time,freq,power per frame")
    p.set_defaults(func=cmd_stft)

    p = sub.add_parser("fit", help="trend + sinusoid least-squares fit")
    _add_input(p)
    p.add_argument("--hint", type=float, help="approximate frequency in Hz")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("pisarenko", help="single-tone Pisarenko frequency estimate")
    _add_input(p)
    p.set_defaults(func=cmd_pisarenko)
    return parser


def _config_defaults(path: str | None) -> dict[str, Any]:
    path = path or os.environ.get(CONFIG_ENV)
    if not path:
        return {}
    try:
        cfg = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as e:
        raise UsageError(f"cannot read config {path}: {e}") from None
    if not isinstance(cfg, dict):
        raise UsageError(f"config {path} must hold a JSON object")
    return cfg


def _apply_config(parser: argparse.ArgumentParser, argv: Sequence[str] | None) -> argparse.Namespace:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    defaults = _config_defaults(known.config)
    if defaults:
        sub_action = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction))
        for name in ("analyze", "stft"):
            sp = sub_action.choices[name]
            dests = {a.dest for a in sp._actions}
            sp.set_defaults(**{k: v for k, v in defaults.items() if k in dests})
        allowed = {a.dest for name in ("analyze", "stft") for a in sub_action.choices[name]._actions}
        unknown = sorted(set(defaults) - allowed)
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(unknown)}")
    return parser.parse_args(argv)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = _apply_config(parser, argv)
        return int(args.func(args))
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, OSError) as e:
        print(f"data error: {e}", file=sys.stderr)
        return EXIT_DATA
    except (NumericalError, FloatingPointError) as e:
        print(f"numerical error: {e}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
