"""Observables along hyperboloidal trajectories.

Radiation coefficients are read off at y = 1 with a second spectral
derivative: near scri the field behaves like n pi + b (1-y)^2/4 + O((1-y)^3),
so b = 2 u''(1) (l'Hopital applied to (u - n pi) ((1+y)/(1-y))^2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .spectral import Grid, find_crossings
from .wavemap_core import FieldState, Parity, kinetic_density, potential_density, x_of_y

SETTLE_TOLERANCE = 0.1
QUANTUM = 4.0


@dataclass(frozen=True)
class DiagnosticsRecord:
    s: float
    bondi: float
    b_plus: float
    b_minus: float
    positions: tuple[float, ...] = ()
    t_inferred: float = math.nan

    @property
    def c1(self) -> float:
        """Outermost crossing, NaN when the field crosses no level."""
        return self.positions[-1] if self.positions else math.nan

    def to_row(self) -> dict:
        return {"s": self.s, "bondi": self.bondi, "b_plus": self.b_plus,
                "c1_x": self.c1, "t_inferred": self.t_inferred}


class NotSettledError(RuntimeError):
    """The energy has not levelled off; carries the last value."""

    def __init__(self, energy: float, variation: float):
        super().__init__(f"energy not settled: last {energy:.6g}, variation {variation:.3g} "
                         f"over the final quarter")
        self.energy = energy
        self.variation = variation


# -- per-snapshot observables ------------------------------------------------------

def bondi_energy(state: FieldState, grid: Grid) -> float:
    """int (u_s^2/2 + u_x^2/2 + 2 sin^2 u) dx on the slice, via quadrature in y."""
    density = kinetic_density(state, grid) + potential_density(state, grid)
    factor = 1.0 if grid.full_line else 2.0
    return factor * float(grid.quad_weights @ density)


def radiation_coefficient(state: FieldState, grid: Grid) -> float:
    """b_+ = lim_{y->1} (u - n pi) ((1+y)/(1-y))^2, computed as 2 u_yy(1)."""
    w = state.u - state.degree * math.pi
    return float(2.0 * (grid.diff2[-1] @ w))


def radiation_coefficients(state: FieldState, grid: Grid) -> tuple[float, float]:
    """(b_+, b_-).  On a half-domain grid b_- follows from parity."""
    bp = radiation_coefficient(state, grid)
    if grid.full_line:
        # at y = -1 the field tends to 0 and e^{x/2} = ((1+y)/(1-y))^2
        bm = float(2.0 * (grid.diff2[0] @ state.u))
        return bp, bm
    return bp, (bp if state.parity is Parity.EVEN else -bp)


def kink_positions(state: FieldState, grid: Grid) -> list[float]:
    """Crossings of u through odd multiples of pi/2, as ascending x values.

    Crossings at y = +-1 (x infinite) are dropped.  Half-domain grids report
    the x >= 0 side only.
    """
    u = state.u
    lo, hi = float(np.min(u)), float(np.max(u))
    first = math.ceil((lo / (math.pi / 2) - 1.0) / 2.0)
    last = math.floor((hi / (math.pi / 2) - 1.0) / 2.0)
    ys: list[float] = []
    for m in range(first, last + 1):
        level = (2 * m + 1) * math.pi / 2
        ys.extend(y for y in find_crossings(grid, u, level) if -1.0 < y < 1.0)
    return sorted(float(x_of_y(y)) for y in set(ys))


def record(state: FieldState, grid: Grid) -> DiagnosticsRecord:
    bp, bm = radiation_coefficients(state, grid)
    pos = tuple(kink_positions(state, grid))
    t = state.s + math.cosh(pos[-1]) if pos else math.nan
    return DiagnosticsRecord(state.s, bondi_energy(state, grid), bp, bm, pos, t)


def compute_records(trajectory, grid: Grid) -> list[DiagnosticsRecord]:
    return [record(st, grid) for st in trajectory.states]


# -- time-series checks ---------------------------------------------------------------

def time_derivative(times, values) -> np.ndarray:
    """Centered differences: fourth order on uniform samples, second order otherwise."""
    t = np.asarray(times, dtype=float)
    f = np.asarray(values, dtype=float)
    if t.size < 3:
        raise ValueError("need at least 3 samples")
    out = np.gradient(f, t, edge_order=2)
    h = np.diff(t)
    if t.size >= 5 and np.allclose(h, h[0], rtol=1e-9, atol=0.0):
        out[2:-2] = (f[:-4] - 8 * f[1:-3] + 8 * f[3:-1] - f[4:]) / (12 * h[0])
    return out


@dataclass
class FluxCheck:
    times: np.ndarray
    energy_rate: np.ndarray
    loss_rate: np.ndarray
    residual: np.ndarray = field(init=False)

    def __post_init__(self):
        self.residual = self.energy_rate + self.loss_rate

    def relative_residual(self, window: tuple[float, float] | None = None) -> float:
        """max |residual| / max |dE/ds| over the window (0 when nothing is radiated)."""
        mask = np.ones(self.times.size, dtype=bool)
        if window is not None:
            mask = (self.times >= window[0]) & (self.times <= window[1])
        if not mask.any():
            raise ValueError("no samples inside the window")
        scale = float(np.max(np.abs(self.energy_rate[mask])))
        worst = float(np.max(np.abs(self.residual[mask])))
        if scale == 0.0:
            return worst
        return worst / scale


def energy_flux_check(trajectory, grid: Grid, records: Sequence[DiagnosticsRecord] | None = None
                      ) -> FluxCheck:
    """Compare dE/ds with -(b_+'^2 + b_-'^2)/2, both by differencing samples."""
    recs = list(records) if records is not None else compute_records(trajectory, grid)
    if len(recs) < 3:
        raise ValueError("energy flux check needs at least 3 samples")
    s = np.array([r.s for r in recs])
    dE = time_derivative(s, [r.bondi for r in recs])
    dbp = time_derivative(s, [r.b_plus for r in recs])
    dbm = time_derivative(s, [r.b_minus for r in recs])
    return FluxCheck(s, dE, 0.5 * (dbp**2 + dbm**2))


def monotonicity_violations(records: Iterable[DiagnosticsRecord], rel_tol: float = 1e-6
                            ) -> list[int]:
    """Indices i where E_i exceeds E_{i-1} by more than rel_tol * E_{i-1}."""
    energies = [r.bondi for r in records]
    return [i for i in range(1, len(energies))
            if energies[i] - energies[i - 1] > rel_tol * max(energies[i - 1], 0.0)]


@dataclass(frozen=True)
class EnergyQuantum:
    N: int
    energy: float
    variation: float


def final_energy_quantum(records, tolerance: float = SETTLE_TOLERANCE) -> EnergyQuantum:
    """Round the final energy to a multiple of 4.

    ``records`` may be DiagnosticsRecords or raw energies.  Raises
    :class:`NotSettledError` when the energy varies by ``tolerance`` or more over
    the last quarter of samples.
    """
    energies = np.array([r.bondi if isinstance(r, DiagnosticsRecord) else float(r) for r in records])
    if energies.size < 4:
        raise ValueError("need at least 4 samples")
    tail = energies[-max(2, energies.size // 4):]
    variation = float(tail.max() - tail.min())
    if variation >= tolerance:
        raise NotSettledError(float(energies[-1]), variation)
    return EnergyQuantum(int(round(energies[-1] / QUANTUM)), float(energies[-1]), variation)
