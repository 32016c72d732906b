"""Parametric frequency estimation below and around the spectral resolution.

Two estimators live here:

* a least-squares fit of ``A + B t + C sin(2 pi D t + E)``; for a fixed
  frequency ``D`` the model is linear in the other four parameters, so they are
  solved in closed form and a downhill simplex searches ``log D`` only;
* the closed-form single-tone Pisarenko estimator from lag-1 and lag-2
  autocorrelations.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np
import numpy.typing as npt

from .errors import DataError, NumericalError
from .preprocess import detrend_linear
from .synth import wrap_phase
from .timebase import FloatArray, TimeSeries

_NR_TINY = 1e-10


class SimplexResult(NamedTuple):
    x: FloatArray
    fun: float
    iterations: int
    converged: bool


def _checked(objective: Callable[[FloatArray], float], x: FloatArray) -> float:
    v = float(objective(x))
    if not math.isfinite(v):
        raise NumericalError(f"objective not finite at {x.tolist()}")
    return v


def _simplex_run(
    objective: Callable[[FloatArray], float],
    x0: FloatArray,
    scale: FloatArray,
    tol: float,
    max_iter: int,
) -> SimplexResult:
    n = x0.size
    pts = np.vstack([x0] + [x0 + scale[i] * np.eye(n)[i] for i in range(n)])
    vals = np.array([_checked(objective, p) for p in pts])
    it = 0
    while True:
        order = np.argsort(vals, kind="stable")
        pts, vals = pts[order], vals[order]
        lo, hi = vals[0], vals[-1]
        flat = 2.0 * abs(hi - lo) <= tol * (abs(hi) + abs(lo) + _NR_TINY)
        # vertices on one level set also pass the value test; require a small simplex too
        small = np.max(np.abs(pts[1:] - pts[0])) <= math.sqrt(tol) * (1.0 + np.max(np.abs(pts[0])))
        if flat and small:
            return SimplexResult(pts[0].copy(), float(lo), it, True)
        if it >= max_iter:
            return SimplexResult(pts[0].copy(), float(lo), it, False)
        it += 1

        centroid = pts[:-1].mean(axis=0)
        xr = centroid + (centroid - pts[-1])
        fr = _checked(objective, xr)
        if fr < vals[0]:
            xe = centroid + 2.0 * (xr - centroid)
            fe = _checked(objective, xe)
            if fe < fr:
                pts[-1], vals[-1] = xe, fe
            else:
                pts[-1], vals[-1] = xr, fr
            continue
        if fr < vals[-2]:
            pts[-1], vals[-1] = xr, fr
            continue
        if fr < vals[-1]:
            xc = centroid + 0.5 * (xr - centroid)
            fc = _checked(objective, xc)
            accept = fc <= fr
        else:
            xc = centroid + 0.5 * (pts[-1] - centroid)
            fc = _checked(objective, xc)
            accept = fc < vals[-1]
        if accept:
            pts[-1], vals[-1] = xc, fc
            continue
        for i in range(1, n + 1):
            pts[i] = pts[0] + 0.5 * (pts[i] - pts[0])
            vals[i] = _checked(objective, pts[i])


def nelder_mead(
    objective: Callable[[FloatArray], float],
    x0: Sequence[float] | npt.ArrayLike,
    scale: Sequence[float] | npt.ArrayLike,
    tol: float = 1e-9,
    max_iter: int = 5000,
    restarts: int = 0,
) -> SimplexResult:
    """Minimize ``objective`` with the downhill simplex method.

    Reflection, expansion, contraction and shrink use coefficients
    ``1, 2, 0.5, 0.5``. The starting simplex is ``x0`` plus one vertex offset
    by ``scale[i]`` along each axis. A run stops once the objective values on
    the simplex agree to relative tolerance ``tol``::

        2 |f_worst - f_best| <= tol (|f_worst| + |f_best| + 1e-10)

    and every vertex lies within ``sqrt(tol) (1 + max|x_best|)`` of the best
    one (coordinate-wise), or after ``max_iter`` iterations. Each of the optional ``restarts``
    rebuilds a fresh simplex around the best point, which guards against
    premature collapse on curved valleys; restarting stops early once a run
    no longer improves the minimum.

    Parameters
    ----------
    objective
        Maps a 1-D parameter vector to a real number.
    x0, scale
        Starting point and per-axis simplex offsets (all > 0).

    Returns
    -------
    SimplexResult
        Best vertex, its value, total iterations and whether the last run met
        the tolerance.

    Raises
    ------
    NumericalError
        If the objective returns a non-finite value at any evaluated point.
    """
    x = np.atleast_1d(np.asarray(x0, dtype=np.float64)).copy()
    s = np.atleast_1d(np.asarray(scale, dtype=np.float64))
    if x.size < 1:
        raise ValueError("need at least one parameter")
    if s.shape != x.shape or not np.all(s > 0):
        raise ValueError("scale must match x0 and be positive")
    result = _simplex_run(objective, x, s, tol, max_iter)
    total = result.iterations
    for _ in range(restarts):
        again = _simplex_run(objective, result.x, s, tol, max(max_iter - total, 0))
        total += again.iterations
        improved = again.fun < result.fun
        if again.fun <= result.fun:
            result = again
        if not improved:
            break
    return SimplexResult(result.x, result.fun, total, result.converged)


# --------------------------------------------------------------------------- trend + sinusoid


@dataclass(frozen=True)
class SinusoidTrendModel:
    """``A + B t + C sin(2 pi D t + E)``."""

    A: float
    B: float
    C: float
    D: float
    E: float

    def __call__(self, t: npt.ArrayLike) -> FloatArray:
        tv = np.asarray(t, dtype=np.float64)
        return self.A + self.B * tv + self.C * np.sin(2.0 * np.pi * self.D * tv + self.E)

    def canonical(self) -> "SinusoidTrendModel":
        """Equivalent model with ``C >= 0``, ``D > 0`` and ``E`` in ``[-pi, pi)``."""
        if self.D == 0:
            raise ValueError("frequency D must be non-zero")
        C, D, E = self.C, self.D, self.E
        if D < 0:
            D, E = -D, -E
            C = -C
        if C < 0:
            C, E = -C, E + math.pi
        return SinusoidTrendModel(self.A, self.B, C, D, wrap_phase(E))

    def as_dict(self) -> dict[str, float]:
        return asdict(self)


@dataclass(frozen=True)
class FitResult:
    model: SinusoidTrendModel
    sse: float
    iterations: int
    converged: bool
    restarts_used: int

    def as_dict(self) -> dict[str, object]:
        return {
            "model": self.model.as_dict(),
            "sse": self.sse,
            "iterations": self.iterations,
            "converged": self.converged,
            "restarts_used": self.restarts_used,
        }


class _Profile(NamedTuple):
    sse: float
    coef: FloatArray


def _profile(x: FloatArray, t: FloatArray, d: float) -> _Profile:
    arg = 2.0 * np.pi * d * t
    design = np.column_stack((np.ones_like(t), t, np.sin(arg), np.cos(arg)))
    coef, *_ = np.linalg.lstsq(design, x, rcond=None)
    r = x - design @ coef
    return _Profile(float(r @ r), coef)


def fit_trend_sinusoid(
    x: TimeSeries,
    d_hint: float | None = None,
    *,
    n_grid: int = 50,
    tol: float = 1e-10,
    max_iter: int = 2000,
    max_restarts: int = 2,
) -> FitResult:
    """Least-squares fit of a line plus one sinusoid.

    ``D`` is first located on ``n_grid`` log-spaced candidates between
    ``0.1 / T_s`` and ``max(3 / T_s, 2 d_hint)``; the best candidate (lowest
    SSE, ties to the lower frequency) seeds a simplex over ``log D``. Up to
    ``max_restarts`` restarts from a perturbed best point are tried before
    ``converged=False`` is reported. The fit never raises for lack of
    convergence.

    ``D`` is floored at ``0.1 / T_s``: below that a sinusoid is numerically a
    polynomial and the inner fit trades it against the line with huge
    cancelling coefficients.
    """
    if x.n_s < 8:
        raise DataError(f"sinusoid fit needs at least 8 samples, got {x.n_s}")
    if d_hint is not None and not d_hint > 0:
        raise ValueError("d_hint must be positive")
    t = x.times()
    xv = x.samples
    T_s = x.duration_s
    d_lo = 0.1 / T_s
    d_hi = max(3.0 / T_s, 2.0 * d_hint if d_hint is not None else 0.0)
    grid = np.geomspace(d_lo, d_hi, n_grid)
    sses = np.array([_profile(xv, t, d).sse for d in grid])
    best = int(np.argmin(sses))  # first minimum == lowest frequency among ties
    log_step = math.log(d_hi / d_lo) / (n_grid - 1)

    log_lo = math.log(d_lo)

    def to_d(u: FloatArray) -> float:
        return math.exp(max(float(u[0]), log_lo))

    def objective(u: FloatArray) -> float:
        return _profile(xv, t, to_d(u)).sse

    start = np.array([math.log(grid[best])])
    run = nelder_mead(objective, start, [log_step], tol=tol, max_iter=max_iter)
    iterations = run.iterations
    restarts = 0
    rng = np.random.Generator(np.random.PCG64(0))
    while not run.converged and restarts < max_restarts:
        restarts += 1
        perturbed = run.x + rng.uniform(-0.5, 0.5, size=1) * log_step
        again = nelder_mead(objective, perturbed, [log_step], tol=tol, max_iter=max_iter)
        iterations += again.iterations
        if again.fun <= run.fun:
            run = again

    d = to_d(run.x)
    prof = _profile(xv, t, d)
    a0, b0, s, c = prof.coef
    model = SinusoidTrendModel(float(a0), float(b0), float(math.hypot(s, c)), d, float(math.atan2(c, s)))
    return FitResult(model.canonical(), prof.sse, iterations, bool(run.converged), restarts)


# --------------------------------------------------------------------------- Pisarenko


def _autocorr(v: FloatArray, lag: int) -> float:
    n = v.size
    return float(v[: n - lag] @ v[lag:]) / n


def pisarenko_single_tone(x: TimeSeries) -> float:
    """Single-tone frequency from biased lag-1 and lag-2 autocorrelations.

    After linear detrending::

        cos w = (r2 + sqrt(r2^2 + 8 r1^2)) / (4 r1),   f = w rate / (2 pi)

    evaluated in the algebraically equivalent form
    ``2 r1 / (sqrt(r2^2 + 8 r1^2) - r2)`` when ``r2 < 0`` to avoid
    cancellation.

    Raises
    ------
    NumericalError
        When the lag-1 autocorrelation of the mean-removed series vanishes
        (``|r1| <= 1e-12 r0``), which happens for a tone at a quarter of the
        sampling rate, or when the series has no variance.
    """
    if x.n_s < 16:
        raise DataError(f"Pisarenko estimate needs at least 16 samples, got {x.n_s}")
    centred = x.samples - x.samples.mean()
    c0, c1 = _autocorr(centred, 0), _autocorr(centred, 1)
    if c0 == 0.0:
        raise NumericalError("degenerate sample: zero variance")
    if abs(c1) <= 1e-12 * c0:
        raise NumericalError("quarter-rate ambiguity: lag-1 autocorrelation vanishes")

    v = detrend_linear(x).series.samples
    r1, r2 = _autocorr(v, 1), _autocorr(v, 2)
    root = math.sqrt(r2 * r2 + 8.0 * r1 * r1)
    if r2 < 0:
        cos_w = 2.0 * r1 / (root - r2)
    elif r1 != 0.0:
        cos_w = (r2 + root) / (4.0 * r1)
    else:
        raise NumericalError("quarter-rate ambiguity: lag-1 autocorrelation vanishes")
    w = math.acos(min(1.0, max(-1.0, cos_w)))
    return w * x.rate_hz / (2.0 * math.pi)
