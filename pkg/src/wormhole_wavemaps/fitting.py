"""Fitting c1(t) = p (log(t - t0) + log A) to kink trajectories."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import least_squares, minimize_scalar

from .ode_models import c1_exponent, physical_rate
from .diagnostics import DiagnosticsRecord

MIN_FIT_SAMPLES = 10
MIN_WINDOW_RECORDS = 30


class FitError(ValueError):
    """Samples do not determine the law (too few, unordered or degenerate)."""


class WindowError(ValueError):
    """No stretch of the run qualifies as asymptotic."""


@dataclass(frozen=True)
class FitResult:
    A: float
    t0: float
    exponent: float
    window: tuple[float, float]
    rms_residual: float
    A_predicted: float | None = None
    rel_deviation: float | None = None
    slope: float | None = None
    n_samples: int = 0

    def to_dict(self) -> dict:
        d = asdict(self)
        d["window"] = list(self.window)
        return d


def _log_a(t, c, p, t0):
    return float(np.mean(c / p - np.log(t - t0)))


def _rms(t, c, p, t0):
    la = _log_a(t, c, p, t0)
    r = c - p * (np.log(t - t0) + la)
    return math.sqrt(float(np.mean(r * r)))


def fit_log_law(t, c1, exponent: float, A_predicted: float | None = None,
                scan_points: int = 400) -> FitResult:
    """Least squares for (A, t0) with the exponent held fixed.

    For fixed t0 the optimal log A is a mean; t0 is searched on (-10 t_min, t_min)
    by a coarse scan followed by golden-section refinement and a final joint
    Gauss-Newton polish.
    """
    t = np.asarray(t, dtype=float)
    c = np.asarray(c1, dtype=float)
    p = float(exponent)
    if t.shape != c.shape or t.ndim != 1:
        raise FitError("t and c1 must be 1-d arrays of equal length")
    if t.size < MIN_FIT_SAMPLES:
        raise FitError(f"need at least {MIN_FIT_SAMPLES} samples, got {t.size}")
    if not (np.all(np.isfinite(t)) and np.all(np.isfinite(c))):
        raise FitError("samples must be finite")
    if np.any(np.diff(t) <= 0):
        raise FitError("t must be strictly increasing")
    if np.ptp(c) <= 1e-12 * max(1.0, float(np.max(np.abs(c)))):
        raise FitError("c1 is constant; the log law is undetermined")
    if p <= 0:
        raise FitError("exponent must be positive")

    t_min = float(t[0])
    span = max(abs(t_min), float(t[-1] - t[0]))
    lo = t_min - 10.0 * span if t_min <= 0 else -10.0 * t_min
    hi = t_min - 1e-9 * span
    # denser scan near t_min, where the objective changes fastest
    u = np.linspace(0.0, 1.0, scan_points)
    grid = hi - (hi - lo) * u**2
    vals = np.array([_rms(t, c, p, g) for g in grid])
    k = int(np.argmin(vals))
    if 0 < k < grid.size - 1:
        bracket = (grid[k + 1], grid[k], grid[k - 1])
        res = minimize_scalar(lambda x: _rms(t, c, p, x), bracket=bracket, method="golden",
                              tol=1e-12)
        t0 = float(res.x) if res.x < t_min and res.fun <= vals[k] else float(grid[k])
    else:
        t0 = float(grid[k])

    la = _log_a(t, c, p, t0)

    def resid(z):
        return c - p * (np.log(np.maximum(t - z[0], 1e-300)) + z[1])

    scale = max(1.0, abs(t0), span)
    polished = least_squares(resid, [t0, la], x_scale=[scale, 1.0], xtol=1e-15, ftol=1e-15,
                             gtol=1e-15, method="lm")
    if polished.success and polished.x[0] < t_min:
        cand = polished.x
        if np.sqrt(np.mean(resid(cand) ** 2)) <= _rms(t, c, p, t0) * (1 + 1e-12) + 1e-15:
            t0, la = float(cand[0]), float(cand[1])
    rms = math.sqrt(float(np.mean(resid([t0, la]) ** 2)))
    A = math.exp(la)
    slope = float(np.polyfit(np.log(t - t0), c, 1)[0])
    rel = abs(A - A_predicted) / A_predicted if A_predicted else None
    return FitResult(A, t0, p, (float(t[0]), float(t[-1])), rms, A_predicted, rel, slope, int(t.size))


# -- window selection ------------------------------------------------------------------

def local_slopes(t, c1) -> np.ndarray:
    """d c1 / d log t by centered differences."""
    return np.gradient(np.asarray(c1, dtype=float), np.log(np.asarray(t, dtype=float)))


def select_fit_window(records: Sequence[DiagnosticsRecord], upper: float, exponent: float,
                      min_c1: float = 2.0, energy_window: float = 0.5, slope_tol: float = 0.2,
                      min_ratio: float = 3.0) -> tuple[float, float]:
    """Longest contiguous stretch with c1 > min_c1, |E - upper| < energy_window
    and local slope within slope_tol (relative) of the exponent."""
    recs = [r for r in records if r.positions and math.isfinite(r.t_inferred)]
    if len(records) < MIN_WINDOW_RECORDS:
        raise WindowError(f"need at least {MIN_WINDOW_RECORDS} records, got {len(records)}")
    if len(recs) < 3:
        raise WindowError("not in the asymptotic regime: the chain is never present")
    # t_inferred must increase for the slope to make sense
    keep = [recs[0]]
    for r in recs[1:]:
        if r.t_inferred > keep[-1].t_inferred:
            keep.append(r)
    t = np.array([r.t_inferred for r in keep])
    c = np.array([r.c1 for r in keep])
    E = np.array([r.bondi for r in keep])
    slope = local_slopes(t, c) if t.size >= 2 else np.zeros_like(t)
    ok = (c > min_c1) & (np.abs(E - upper) < energy_window) & \
        (np.abs(slope - exponent) <= slope_tol * exponent)
    best = None
    i = 0
    while i < ok.size:
        if not ok[i]:
            i += 1
            continue
        j = i
        while j + 1 < ok.size and ok[j + 1]:
            j += 1
        if best is None or (j - i) > (best[1] - best[0]):
            best = (i, j)
        i = j + 1
    if best is None:
        raise WindowError("not in the asymptotic regime: no record meets the window criteria")
    t_min, t_max = float(t[best[0]]), float(t[best[1]])
    if t_max < min_ratio * t_min:
        raise WindowError(f"not in the asymptotic regime: window [{t_min:.4g}, {t_max:.4g}] "
                          f"spans less than a factor {min_ratio:g}")
    return t_min, t_max


def fit_records(records: Sequence[DiagnosticsRecord], N: int,
                window: tuple[float, float] | None = None, upper: float | None = None) -> FitResult:
    """Fit the law for an N-chain (2 or 3) to records, choosing the window if not given."""
    p = c1_exponent(N)
    upper = 4.0 * N if upper is None else upper
    if window is None:
        window = select_fit_window(records, upper, p)
    sel = [r for r in records if r.positions and window[0] <= r.t_inferred <= window[1]]
    t = np.array([r.t_inferred for r in sel])
    c = np.array([r.c1 for r in sel])
    order = np.argsort(t, kind="stable")
    t, c = t[order], c[order]
    mask = np.concatenate([[True], np.diff(t) > 0])
    return fit_log_law(t[mask], c[mask], p, A_predicted=physical_rate(N))
