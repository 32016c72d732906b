"""CSV ingestion, column files and the JSON analysis report."""

from __future__ import annotations

import json
import re
from pathlib import Path
from typing import IO, Any, Iterable, Sequence

import numpy as np

from .errors import DataError
from .timebase import TimeSeries

SCHEMA_VERSION = 1
JITTER_TOLERANCE = 1e-3

_SPLIT = re.compile(r"[,;\s]+")


def format_float(v: float) -> str:
    """Shortest text that parses back to exactly ``v``."""
    return repr(float(v))


def _parse_row(line: str) -> list[float]:
    return [float(tok) for tok in _SPLIT.split(line.strip()) if tok]


def _snap_rate(rate: float) -> float:
    # decimal timestamps such as 0.1, 0.2 ... give 9.999999999999998 Hz otherwise
    snapped = float(f"{rate:.12g}")
    return snapped if abs(snapped - rate) <= 1e-9 * rate else rate


def read_csv_text(text: str, rate_hz: float | None = None, source: str = "<text>") -> TimeSeries:
    """Parse one-column (values) or two-column (time, value) numeric text.

    A single non-numeric first line is treated as a header. For two columns
    the rate is ``1 / median(dt)`` unless ``rate_hz`` is given, and every
    step must be within 0.1 % of that median.
    """
    rows: list[list[float]] = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        try:
            row = _parse_row(line)
        except ValueError:
            if lineno == 1:
                continue
            raise DataError(f"{source}:{lineno}: non-numeric value in {line.strip()!r}") from None
        if rows and len(row) != len(rows[0]):
            raise DataError(f"{source}:{lineno}: expected {len(rows[0])} columns, got {len(row)}")
        if len(row) not in (1, 2):
            raise DataError(f"{source}:{lineno}: expected 1 or 2 columns, got {len(row)}")
        rows.append(row)
    if not rows:
        raise DataError(f"{source}: no samples")

    data = np.array(rows, dtype=np.float64)
    if data.shape[1] == 1:
        if rate_hz is None:
            raise ValueError("sampling rate required for one-column input (use --rate)")
        return TimeSeries(data[:, 0], rate_hz, 0.0, {"source": source})

    t, values = data[:, 0], data[:, 1]
    if t.size < 2:
        if rate_hz is None:
            raise DataError(f"{source}: need two timestamps to infer the sampling rate")
        return TimeSeries(values, rate_hz, float(t[0]), {"source": source})
    dt = np.diff(t)
    step = float(np.median(dt))
    if not step > 0 or np.max(np.abs(dt - step)) > JITTER_TOLERANCE * step:
        raise DataError(f"{source}: non-uniform sampling unsupported")
    rate = rate_hz if rate_hz is not None else _snap_rate(1.0 / step)
    return TimeSeries(values, rate, float(t[0]), {"source": source})


def ingest_csv(path: str | Path, rate_hz: float | None = None) -> TimeSeries:
    """Load a time series from a CSV/whitespace text file (see :func:`read_csv_text`)."""
    p = Path(path)
    return read_csv_text(p.read_text(), rate_hz, source=str(path))


def write_columns(
    out: str | Path | IO[str],
    columns: Sequence[Iterable[float]],
    header: Sequence[str] | None = None,
) -> None:
    """Write equal-length columns as comma-separated full-precision text."""
    cols = [np.asarray(list(c) if not isinstance(c, np.ndarray) else c, dtype=np.float64) for c in columns]
    lines = [",".join(header)] if header else []
    lines.extend(",".join(format_float(v) for v in row) for row in zip(*cols))
    text = "\n".join(lines) + "\n"
    if isinstance(out, (str, Path)):
        Path(out).write_text(text)
    else:
        out.write(text)


def series_to_csv(x: TimeSeries, out: str | Path | IO[str]) -> None:
    write_columns(out, [x.times(), x.samples], header=("t", "x"))


def _clean(obj: Any) -> Any:
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps_report(doc: dict[str, Any]) -> str:
    """Stable JSON text: sorted keys, two-space indent, round-trip floats.

    Non-finite numbers use the ``Infinity``/``NaN`` tokens understood by
    Python's :mod:`json`.
    """
    return json.dumps(_clean(doc), sort_keys=True, indent=2) + "\n"


def loads_report(text: str) -> dict[str, Any]:
    return json.loads(text)
