"""Method-of-lines time integration with adaptive error control.

Two steppers share one small interface (``step``, ``t``, ``y``, ``dense``):

* :class:`DormandPrince` -- explicit 5(4) embedded pair that shortens steps
  to land exactly on sample times; used for the collective-coordinate ODEs.
* :class:`RadauStepper` -- wraps scipy's Radau IIA (order 5, implicit) for the
  hyperboloidal field, whose damping term grows like (1-y)^-2 near y = 1 and
  makes explicit stepping impractically stiff.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, asdict
from typing import Callable, Sequence

import numpy as np
from scipy.integrate import Radau

from .ode_models import ChainState, chain_rhs_arrays, ordering_ok
from .spectral import Grid
from .wavemap_core import FieldState, HyperboloidalSystem, check_finite

MIN_STEP = 1e-12


class Termination(enum.Enum):
    REACHED_END = "reached_end"
    EVENT = "event"
    STEP_FAILURE = "step_failure"


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = 1e-9
    abs_tol: float = 1e-9
    s_end: float = 10.0
    sample_interval: float = 0.5
    max_step: float | None = None
    method: str = "radau"
    min_step: float = MIN_STEP

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.sample_interval <= 0:
            raise ValueError("sample_interval must be positive")
        if self.method not in ("radau", "dopri5"):
            raise ValueError(f"unknown method {self.method!r}")

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass
class Trajectory:
    """Snapshots at sample times plus the reason the run stopped."""

    times: list[float] = field(default_factory=list)
    states: list = field(default_factory=list)
    reason: Termination = Termination.REACHED_END
    detail: str = ""
    event_index: int | None = None
    direction: float = 1.0

    def append(self, s: float, state) -> None:
        # samples must advance in the integration direction
        if self.times and (s - self.times[-1]) * self.direction <= 0:
            return
        self.times.append(float(s))
        self.states.append(state)

    @property
    def final(self):
        return self.states[-1]

    def __len__(self) -> int:
        return len(self.times)


class IntegrationError(RuntimeError):
    """Step-size collapse; carries the last good state and the partial trajectory."""

    def __init__(self, message: str, last_state, trajectory: Trajectory):
        super().__init__(message)
        self.last_state = last_state
        self.trajectory = trajectory


# -- steppers --------------------------------------------------------------------

# Dormand & Prince (1980) coefficients
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    [],
    [1 / 5],
    [3 / 40, 9 / 40],
    [44 / 45, -56 / 15, 32 / 9],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
]
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])
_E = _B5 - _B4


class StepSizeCollapse(RuntimeError):
    pass


class DormandPrince:
    """Explicit Runge-Kutta 5(4) with FSAL and an elementary step controller.

    ``step(stop_at=...)`` shortens the step so that it lands exactly on a
    sample time; snapshots then never need interpolation.
    """

    order = 5
    lands_on_samples = True

    def __init__(self, fun, t0, y0, t_bound, rtol, atol, max_step=None, min_step=MIN_STEP):
        self.fun = fun
        self.t = float(t0)
        self.y = np.array(y0, dtype=float)
        self.t_bound = float(t_bound)
        self.direction = 1.0 if t_bound >= t0 else -1.0
        self.rtol, self.atol = rtol, atol
        self.max_step = np.inf if max_step is None else float(max_step)
        self.min_step = min_step
        self.f = np.asarray(fun(self.t, self.y), dtype=float)
        self.nfev = 1
        self.h = self._initial_step()
        self.t_old = self.y_old = self.f_old = None
        self.done = self.t == self.t_bound

    def _norm(self, e, scale):
        return float(np.sqrt(np.mean((e / scale) ** 2)))

    def _initial_step(self) -> float:
        scale = self.atol + self.rtol * np.abs(self.y)
        d0 = self._norm(self.y, scale)
        d1 = self._norm(self.f, scale)
        h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
        y1 = self.y + self.direction * h0 * self.f
        f1 = self.fun(self.t + self.direction * h0, y1)
        self.nfev += 1
        d2 = self._norm(f1 - self.f, scale) / h0
        if max(d1, d2) <= 1e-15:
            h1 = max(1e-6, h0 * 1e-3)
        else:
            h1 = (0.01 / max(d1, d2)) ** (1 / self.order)
        return min(100 * h0, h1, self.max_step, abs(self.t_bound - self.t))

    def step(self, stop_at: float | None = None) -> None:
        h = self.h
        limit = abs(self.t_bound - self.t)
        if stop_at is not None:
            limit = min(limit, abs(stop_at - self.t))
        while True:
            h = min(h, self.max_step, limit)
            if h < self.min_step and abs(self.t_bound - self.t) > self.min_step:
                raise StepSizeCollapse(f"step size {h:.3e} below {self.min_step:.1e} at t={self.t}")
            hs = self.direction * h
            K = [self.f]
            for i in range(1, 7):
                yi = self.y + hs * sum(a * k for a, k in zip(_A[i], K))
                K.append(np.asarray(self.fun(self.t + _C[i] * hs, yi), dtype=float))
            self.nfev += 6
            y_new = self.y + hs * sum(b * k for b, k in zip(_B5, K) if b != 0.0)
            err_vec = hs * sum(e * k for e, k in zip(_E, K) if e != 0.0)
            scale = self.atol + self.rtol * np.maximum(np.abs(self.y), np.abs(y_new))
            err = self._norm(err_vec, scale)
            if not np.isfinite(err):
                h *= 0.2
                continue
            if err <= 1.0:
                factor = 5.0 if err == 0 else min(5.0, max(0.2, 0.9 * err ** (-1 / 5)))
                self.t_old, self.y_old, self.f_old = self.t, self.y, self.f
                t_new = self.t + hs
                if h == limit:
                    t_new = self.t + self.direction * limit
                    if stop_at is not None and abs(stop_at - self.t) == limit:
                        t_new = stop_at
                    if limit == abs(self.t_bound - self.t):
                        t_new = self.t_bound
                self.t, self.y, self.f = t_new, y_new, K[6]
                # a step shortened to hit a sample keeps the controller's proposal
                self.h = h * factor if h < limit else max(self.h, h * factor)
                self.done = self.t == self.t_bound
                return
            h *= max(0.2, 0.9 * err ** (-1 / 5))

    def dense(self, t: float) -> np.ndarray:
        """Cubic Hermite interpolation over the last accepted step."""
        h = self.t - self.t_old
        th = (t - self.t_old) / h
        h00 = (1 + 2 * th) * (1 - th) ** 2
        h10 = th * (1 - th) ** 2
        h01 = th**2 * (3 - 2 * th)
        h11 = th**2 * (th - 1)
        return h00 * self.y_old + h10 * h * self.f_old + h01 * self.y + h11 * h * self.f


class RadauStepper:
    """Adapter exposing scipy's Radau IIA solver through the stepper interface."""

    lands_on_samples = False

    def __init__(self, fun, t0, y0, t_bound, rtol, atol, max_step=None, min_step=MIN_STEP, jac=None):
        self.solver = Radau(fun, t0, y0, t_bound, rtol=rtol, atol=atol,
                            max_step=np.inf if max_step is None else max_step, jac=jac)
        self.min_step = min_step
        self._dense = None

    @property
    def t(self) -> float:
        return self.solver.t

    @property
    def y(self) -> np.ndarray:
        return self.solver.y

    @property
    def done(self) -> bool:
        return self.solver.status == "finished"

    def step(self, stop_at: float | None = None) -> None:
        msg = self.solver.step()
        if self.solver.status == "failed":
            raise StepSizeCollapse(msg or "Radau step failed")
        h = self.solver.step_size
        if h is not None and h < self.min_step and not self.done:
            raise StepSizeCollapse(f"step size {h:.3e} below {self.min_step:.1e}")
        self._dense = None

    def dense(self, t: float) -> np.ndarray:
        if self._dense is None:
            self._dense = self.solver.dense_output()
        return self._dense(t)


# -- driver -------------------------------------------------------------------------

def _drive(stepper, t0, cfg: IntegratorConfig, snapshot: Callable, events: Sequence[Callable],
           guard: Callable | None = None) -> Trajectory:
    """Advance ``stepper`` to cfg.s_end, sampling every cfg.sample_interval."""
    direction = 1.0 if cfg.s_end >= t0 else -1.0
    traj = Trajectory(direction=direction)
    dt = direction * cfg.sample_interval
    first = snapshot(t0, stepper.y)
    traj.append(t0, first)
    for i, ev in enumerate(events):
        if ev(first):
            traj.reason, traj.event_index, traj.detail = Termination.EVENT, i, "event at start"
            return traj
    k = 1
    next_sample = t0 + k * dt

    def past(a, b):
        return (a - b) * direction >= -1e-12 * max(1.0, abs(b))

    while True:
        try:
            stepper.step(next_sample if stepper.lands_on_samples else None)
        except StepSizeCollapse as exc:
            traj.reason, traj.detail = Termination.STEP_FAILURE, str(exc)
            raise IntegrationError(str(exc), traj.final, traj) from exc
        while past(stepper.t, next_sample) and past(cfg.s_end, next_sample):
            y = stepper.y if abs(next_sample - stepper.t) < 1e-14 else stepper.dense(next_sample)
            snap = snapshot(next_sample, y)
            traj.append(next_sample, snap)
            for i, ev in enumerate(events):
                if ev(snap):
                    traj.reason, traj.event_index = Termination.EVENT, i
                    traj.detail = f"event {i} at s={next_sample:.6g}"
                    return traj
            k += 1
            next_sample = t0 + k * dt
        if guard is not None:
            why = guard(stepper.t, stepper.y)
            if why:
                traj.append(stepper.t, snapshot(stepper.t, stepper.y))
                traj.reason, traj.detail = Termination.EVENT, why
                return traj
        if stepper.done:
            if past(stepper.t, traj.times[-1]) and stepper.t != traj.times[-1]:
                traj.append(stepper.t, snapshot(stepper.t, stepper.y))
            traj.reason = Termination.REACHED_END
            return traj


def default_explicit_max_step(grid: Grid) -> float:
    """0.5 * h_min^2: the explicit stability guard for the field system."""
    h = float(np.min(np.diff(grid.nodes)))
    return 0.5 * h * h


def evolve_field(state0: FieldState, grid: Grid, cfg: IntegratorConfig,
                 events: Sequence[Callable[[FieldState], bool]] = ()) -> Trajectory:
    """Integrate (u, v) from ``state0`` to cfg.s_end with snapshots every sample_interval.

    Event predicates are evaluated on each snapshot; the first one returning
    True stops the run.
    """
    check_finite(state0)
    system = HyperboloidalSystem(grid, state0.parity, state0.params)
    z0 = system.pack(state0)

    def snapshot(s, z):
        u, v = system.unpack(z)
        return state0.with_values(s, u, v)

    if cfg.method == "radau":
        stepper = RadauStepper(system, state0.s, z0, cfg.s_end, cfg.rel_tol, cfg.abs_tol,
                               cfg.max_step, cfg.min_step, jac=system.jacobian)
    else:
        max_step = cfg.max_step if cfg.max_step is not None else default_explicit_max_step(grid)
        stepper = DormandPrince(system, state0.s, z0, cfg.s_end, cfg.rel_tol, cfg.abs_tol,
                                max_step, cfg.min_step)
    return _drive(stepper, state0.s, cfg, snapshot, events)


COLLAPSE_RADIUS = 1e-3


def evolve_chain(state0: ChainState, cfg: IntegratorConfig,
                 events: Sequence[Callable[[ChainState], bool]] = ()) -> Trajectory:
    """Integrate the collective-coordinate equations of motion.

    Stops early when the ordering r_1 < ... < r_J is lost or r_1 drops to
    ``COLLAPSE_RADIUS``.  Integration backwards in time is allowed
    (cfg.s_end < state0.t).
    """
    if not ordering_ok(state0.r):
        raise ValueError("chain positions must be positive and strictly increasing")
    J = state0.J
    parity = state0.parity

    def fun(t, z):
        r = z[:J]
        return np.concatenate([z[J:], chain_rhs_arrays(parity, r)])

    def snapshot(t, z):
        return ChainState(parity, z[:J].copy(), z[J:].copy(), float(t))

    def guard(t, z):
        r = z[:J]
        if r[0] <= COLLAPSE_RADIUS:
            return f"collapse: r_1={r[0]:.3e} at t={t:.6g}"
        if not ordering_ok(r):
            return f"ordering lost at t={t:.6g}"
        return ""

    if cfg.method == "radau":
        stepper = RadauStepper(fun, state0.t, np.concatenate([state0.r, state0.rdot]), cfg.s_end,
                               cfg.rel_tol, cfg.abs_tol, cfg.max_step, cfg.min_step)
    else:
        stepper = DormandPrince(fun, state0.t, np.concatenate([state0.r, state0.rdot]), cfg.s_end,
                                cfg.rel_tol, cfg.abs_tol, cfg.max_step, cfg.min_step)

    return _drive(stepper, state0.t, cfg, snapshot, events, guard=guard)


def chain_config(t_end: float, rel_tol: float = 1e-10, abs_tol: float | None = None,
                 sample_interval: float = 1.0, **kw) -> IntegratorConfig:
    """Integrator settings suited to the reduced models (explicit stepping)."""
    return IntegratorConfig(rel_tol=rel_tol, abs_tol=abs_tol if abs_tol is not None else rel_tol,
                            s_end=t_end, sample_interval=sample_interval, method="dopri5", **kw)

