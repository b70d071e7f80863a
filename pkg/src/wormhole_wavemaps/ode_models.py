"""Collective-coordinate models for asymptotically static N-chains.

Positions are r_j = exp(c_j) and time is the rescaled t_resc = (8/sqrt(pi)) t.
For N = 2J + 1 the centre kink sits at c_0 = 0, i.e. r_0 = 1:

    r_j'' = -r_{j-1}^2 / r_j^3 + r_j / r_{j+1}^2          (r_{J+1} = inf)

For N = 2J the innermost equation is replaced by r_1'' = -1/r_1^5 + r_1/r_2^2.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .wavemap_core import Parity

TIME_SCALE = 8.0 / math.sqrt(math.pi)


@dataclass(frozen=True)
class ChainState:
    parity: Parity
    r: np.ndarray
    rdot: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "parity", Parity.parse(self.parity))
        object.__setattr__(self, "r", np.atleast_1d(np.asarray(self.r, dtype=float)))
        object.__setattr__(self, "rdot", np.atleast_1d(np.asarray(self.rdot, dtype=float)))
        if self.r.shape != self.rdot.shape or self.r.ndim != 1 or self.r.size < 1:
            raise ValueError("r and rdot must be equal-length 1-d arrays")

    @property
    def J(self) -> int:
        return self.r.size

    @property
    def N(self) -> int:
        return 2 * self.J + (1 if self.parity is Parity.ODD else 0)


def ordering_ok(r) -> bool:
    r = np.asarray(r)
    return bool(r[0] > 0 and np.all(np.diff(r) > 0))


def _check(state: ChainState) -> None:
    if np.any(state.r <= 0):
        raise ValueError(f"chain positions must be positive, got {state.r}")
    if not ordering_ok(state.r):
        raise ValueError(f"chain positions must be strictly increasing, got {state.r}")


def parity_of(N: int) -> Parity:
    if N < 2:
        raise ValueError("chains need N >= 2")
    return Parity.ODD if N % 2 else Parity.EVEN


# -- equations of motion ----------------------------------------------------------

def chain_rhs_arrays(parity: Parity, r: np.ndarray) -> np.ndarray:
    """Accelerations for positions ``r`` (no validation; used inside integrators)."""
    r = np.asarray(r, dtype=float)
    inner = np.concatenate([[1.0], r[:-1]])
    acc = -inner**2 / r**3
    if parity is Parity.EVEN:
        acc[0] = -1.0 / r[0] ** 5
    acc[:-1] += r[:-1] / r[1:] ** 2
    return acc


def chain_rhs(state: ChainState) -> np.ndarray:
    """Accelerations r_1'' ... r_J'' of the reduced equations of motion."""
    _check(state)
    return chain_rhs_arrays(state.parity, state.r)


def effective_energy(state: ChainState) -> float:
    """Conserved energy, measured from the separated-chain limit.

    Odd N: sum rdot^2 - sum r_{j-1}^2/r_j^2.  Even N: the j = 1 potential term
    is replaced by 1/(2 r_1^4), which is the Legendre transform of the even
    Lagrangian.
    """
    _check(state)
    r = state.r
    inner = np.concatenate([[1.0], r[:-1]])
    pot = inner**2 / r**2
    if state.parity is Parity.EVEN:
        pot[0] = 0.5 / r[0] ** 4
    return float(np.sum(state.rdot**2) - np.sum(pot))


# -- closed forms and leading asymptotics -----------------------------------------

def leading_rate(N: int) -> float:
    """Rate A of the leading power law r_j ~ (A t)^{p_j} (rescaled time)."""
    J = N // 2
    if parity_of(N) is Parity.ODD:
        return (J + 1) / math.sqrt(J)
    return (2 * J + 1) / math.sqrt(4 * J - 2)


def leading_exponents(N: int) -> np.ndarray:
    J = N // 2
    j = np.arange(1, J + 1)
    if parity_of(N) is Parity.ODD:
        return j / (J + 1)
    return (2 * j - 1) / (2 * J + 1)


def leading_asymptotics(N: int, t) -> np.ndarray:
    """Leading-order positions r_j(t) ~ (A t)^{p_j}; shape (J,) or (len(t), J)."""
    t = np.asarray(t, dtype=float)
    if np.any(t <= 0):
        raise ValueError("rescaled time must be positive")
    A = leading_rate(N)
    p = leading_exponents(N)
    return (A * t[..., None]) ** p if t.ndim else (A * t) ** p


def exact_solution(N: int, t: float) -> ChainState:
    """Zero-energy single-particle solutions: (2t)^{1/2} for N=3, ((3/sqrt2) t)^{1/3} for N=2."""
    if N not in (2, 3):
        raise ValueError("closed forms exist for N = 2 and N = 3 only")
    if t <= 0:
        raise ValueError("rescaled time must be positive")
    A = leading_rate(N)
    p = 1.0 / 3.0 if N == 2 else 0.5
    r = (A * t) ** p
    rdot = p * A * (A * t) ** (p - 1.0)
    return ChainState(parity_of(N), [r], [rdot], float(t))


def exact_acceleration(N: int, t: float) -> float:
    A = leading_rate(N)
    p = 1.0 / 3.0 if N == 2 else 0.5
    return p * (p - 1.0) * A * A * (A * t) ** (p - 2.0)


# -- J = 2 asymptotic series --------------------------------------------------------

class SeriesWarning(UserWarning):
    """The series variable is too small for the truncated expansion to be trusted."""


SERIES_MIN_TAU = 3.0


def _series_coefficients(N: int, c: float) -> list[dict[int, float]]:
    if N == 5:
        return [
            {0: 1.0, 2: -3 / 8, 3: c, 4: 3 / 128, 5: 3 * c / 8, 6: 443 / 3072 - c * c},
            {0: 1.0, 2: -1 / 4, 3: 2 * c, 6: -(5 / 192 + c * c)},
        ]
    if N == 4:
        return [
            {0: 1.0, 4: -1 / 6, 5: c / 3, 8: -83 / 1944},
            {0: 1.0, 4: -1 / 6, 5: c, 8: 7 / 648},
        ]
    raise ValueError("series are available for N = 4 and N = 5")


@dataclass(frozen=True)
class SeriesParams:
    N: int
    c: float = 0.0
    order: int | None = None  # highest power of 1/tau kept; None = all printed terms

    def __post_init__(self):
        if self.N not in (4, 5):
            raise ValueError("N must be 4 or 5")

    @property
    def tau_power(self) -> int:
        """tau = (A t)^{1/q}."""
        return 3 if self.N == 5 else 5

    @property
    def position_powers(self) -> np.ndarray:
        return np.array([1, 2]) if self.N == 5 else np.array([1, 3])

    def coefficients(self) -> list[dict[int, float]]:
        coeffs = _series_coefficients(self.N, self.c)
        if self.order is None:
            return coeffs
        return [{k: a for k, a in row.items() if k <= self.order} for row in coeffs]


@dataclass
class SeriesPoint:
    state: ChainState
    tau: float
    acceleration: np.ndarray
    v: np.ndarray
    reliable: bool = field(default=True)


def series_tau(params: SeriesParams, t: float) -> float:
    return (leading_rate(params.N) * t) ** (1.0 / params.tau_power)


def time_of_tau(params: SeriesParams, tau: float) -> float:
    return tau**params.tau_power / leading_rate(params.N)


def series_v(params: SeriesParams, tau: float) -> np.ndarray:
    return np.array([sum(a * tau ** (-k) for k, a in row.items()) for row in params.coefficients()])


def asymptotic_point(params: SeriesParams, t: float) -> SeriesPoint:
    """Series positions, velocities and accelerations at rescaled time ``t``."""
    if t <= 0:
        raise ValueError("rescaled time must be positive")
    A = leading_rate(params.N)
    q = params.tau_power
    tau = series_tau(params, t)
    # r_j = sum_k a_k tau^{p_j - k}; differentiate in tau, then chain rule
    F = np.zeros(2)
    dF = np.zeros(2)
    d2F = np.zeros(2)
    for j, (p, row) in enumerate(zip(params.position_powers, params.coefficients())):
        for k, a in row.items():
            e = p - k
            F[j] += a * tau**e
            dF[j] += a * e * tau ** (e - 1)
            d2F[j] += a * e * (e - 1) * tau ** (e - 2)
    dtau = A / (q * tau ** (q - 1))
    d2tau = -(q - 1) * A / (q * tau**q) * dtau
    rdot = dF * dtau
    racc = d2F * dtau**2 + dF * d2tau
    reliable = tau >= SERIES_MIN_TAU
    if not reliable:
        warnings.warn(f"series variable tau={tau:.3g} < {SERIES_MIN_TAU}; expansion unreliable",
                      SeriesWarning, stacklevel=2)
    state = ChainState(parity_of(params.N), F, rdot, float(t))
    return SeriesPoint(state, float(tau), racc, series_v(params, tau), reliable)


def asymptotic_solution(params: SeriesParams, t: float) -> ChainState:
    """Truncated asymptotic series for the zero-energy J = 2 solution."""
    return asymptotic_point(params, t).state


def series_residual(params: SeriesParams, tau: float) -> np.ndarray:
    """|r'' - chain_rhs(r)| for the truncated series at series variable ``tau``."""
    pt = asymptotic_point(params, time_of_tau(params, tau))
    return np.abs(pt.acceleration - chain_rhs(pt.state))


# -- linearised growing modes ------------------------------------------------------

def linearized_rhs(N: int, tau: float, xi, dxi) -> np.ndarray:
    """xi'' for perturbations v_j = 1 + eps xi_j about the leading-order J = 2 solution."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    x1, x2 = np.asarray(xi, dtype=float)
    d1, d2 = np.asarray(dxi, dtype=float)
    t2 = tau * tau
    if N == 5:
        a1 = 2 * x1 - 4 * t2 * (x2 - 2 * x1)
        a2 = -2 * tau * d2 + 8 * x2 - 4 * x1
    elif N == 4:
        a1 = 2 * tau * d1 + 4 * x1 - 12 * t2 * t2 * (x2 - 3 * x1)
        a2 = -2 * tau * d2 + 24 * x2 - 12 * x1
    else:
        raise ValueError("linearised systems are available for N = 4 and N = 5")
    return np.array([a1, a2]) / t2


def growing_mode_seed(N: int, tau: float) -> tuple[np.ndarray, np.ndarray]:
    """Leading asymptotics of the exponentially growing mode and its derivative."""
    if N == 5:
        r8 = math.sqrt(8.0)
        g = math.exp(r8 * tau)
        xi = np.array([g, -0.5 * tau**-2 * g])
        dxi = np.array([r8 * g, -0.5 * g * (r8 * tau**-2 - 2 * tau**-3)])
    elif N == 4:
        g = math.exp(3 * tau * tau)
        xi = np.array([tau**0.5 * g, -tau**-3.5 * g / 3])
        dxi = np.array([g * (0.5 * tau**-0.5 + 6 * tau**1.5),
                        -g * (-3.5 * tau**-4.5 + 6 * tau**-2.5) / 3])
    else:
        raise ValueError("growing modes are available for N = 4 and N = 5")
    return xi, dxi


def polynomial_mode(N: int, tau: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Energy-changing polynomial mode (xi, xi', xi''): tau^2 (1, 2) for N=5, tau^4 (1, 3) for N=4."""
    if N == 5:
        p, ratio = 2, 2.0
    elif N == 4:
        p, ratio = 4, 3.0
    else:
        raise ValueError("N must be 4 or 5")
    base = np.array([1.0, ratio])
    return base * tau**p, base * p * tau ** (p - 1), base * p * (p - 1) * tau ** (p - 2)


def unstable_growth_exponent(N: int, tau0: float, tau1: float) -> float:
    """log of the growing-mode amplification between tau0 and tau1."""
    if N == 5:
        return math.sqrt(8.0) * (tau1 - tau0)
    if N == 4:
        return 3.0 * (tau1**2 - tau0**2) + 0.5 * math.log(tau1 / tau0)
    raise ValueError("N must be 4 or 5")


def shadowing_window(N: int, tau0: float, max_amplification: float = 1e6) -> float:
    """Largest tau1 for which the growing mode is amplified at most ``max_amplification``."""
    budget = math.log(max_amplification)
    if N == 5:
        return tau0 + budget / math.sqrt(8.0)
    lo, hi = tau0, tau0 + 10.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if unstable_growth_exponent(N, tau0, mid) > budget:
            hi = mid
        else:
            lo = mid
    return lo


# -- unit conversions ----------------------------------------------------------------

def rescale(physical_t):
    """Physical time to the rescaled time of the reduced equations."""
    return TIME_SCALE * np.asarray(physical_t, dtype=float)


def physical_time(rescaled_t):
    return np.asarray(rescaled_t, dtype=float) / TIME_SCALE


def c_of_r(r):
    return np.log(np.asarray(r, dtype=float))


def r_of_c(c):
    return np.exp(np.asarray(c, dtype=float))


def physical_rate(N: int) -> float:
    """Rate A in c_1(t) = p (log(t - t0) + log A) for physical t (N = 2: 12 sqrt(2/pi))."""
    return leading_rate(N) * TIME_SCALE


def c1_exponent(N: int) -> float:
    """Exponent p of the innermost position r_1 ~ (A t)^p, which the PDE fit targets."""
    return float(leading_exponents(N)[0])
