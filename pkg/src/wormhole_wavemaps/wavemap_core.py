"""Equivariant wave maps on the 2+1 wormhole: profiles, energies, hyperboloidal RHS.

Coordinates: r is the areal coordinate of the wormhole, x = asinh(r), and the
compactified coordinate y = tanh(x/4) maps the line onto (-1, 1).  Fields are
sampled in y on a :class:`~wormhole_wavemaps.spectral.Grid`.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace
from functools import cached_property

import numpy as np

from .spectral import Grid


class Parity(enum.Enum):
    """Symmetry class of a solution; fixes the degree and the y = 0 condition."""

    EVEN = "even"  # degree 0, u(-x) = u(x), u_y(0) = 0
    ODD = "odd"  # degree 1, u(-x) = pi - u(x), u(0) = pi/2

    @property
    def degree(self) -> int:
        return 0 if self is Parity.EVEN else 1

    @classmethod
    def parse(cls, value) -> "Parity":
        if isinstance(value, cls):
            return value
        text = str(value).lower()
        if text in ("odd", "oddcentered", "odd_centered"):
            return cls.ODD
        return cls(text)


@dataclass(frozen=True)
class ModelParams:
    k: int = 2
    a: float = 1.0

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 2:
            raise ValueError(f"equivariance index must be an integer >= 2, got {self.k}")
        if self.a != 1.0:
            raise ValueError("the neck radius is fixed to a = 1")


@dataclass(frozen=True)
class FieldState:
    """Field u and its hyperboloidal time derivative v = u_s on a grid."""

    s: float
    u: np.ndarray
    v: np.ndarray
    parity: Parity
    params: ModelParams = field(default_factory=ModelParams)

    @property
    def degree(self) -> int:
        return self.parity.degree

    def with_values(self, s: float, u: np.ndarray, v: np.ndarray) -> "FieldState":
        return replace(self, s=float(s), u=u, v=v)


class NonFiniteStateError(FloatingPointError):
    """Raised when a state carries NaN/Inf samples."""

    def __init__(self, index: int, name: str):
        super().__init__(f"non-finite value in {name} at node {index}")
        self.index = index
        self.name = name


# -- coordinates ---------------------------------------------------------------

def y_of_x(x):
    return np.tanh(np.asarray(x, dtype=float) / 4.0)


def x_of_y(y):
    return 4.0 * np.arctanh(np.asarray(y, dtype=float))


def x_of_r(r):
    return np.arcsinh(np.asarray(r, dtype=float))


def r_of_x(x):
    return np.sinh(np.asarray(x, dtype=float))


def _exp_kx(y, k):
    """e^{k x} = ((1+y)/(1-y))^{2k}; inf at y = 1 instead of a warning."""
    y = np.asarray(y, dtype=float)
    with np.errstate(divide="ignore"):
        return ((1.0 + y) / (1.0 - y)) ** (2 * k)


# -- static profiles -----------------------------------------------------------

def kink(x, c: float = 0.0, k: int = 2):
    """Q(x - c) = 2 arctan(e^{k (x - c)})."""
    return 2.0 * np.arctan(np.exp(k * (np.asarray(x, dtype=float) - c)))


def kink_in_y(y, k: int = 2):
    """Kink centred at x = 0 sampled in the compact coordinate (exact at y = +-1)."""
    return 2.0 * np.arctan(_exp_kx(y, k))


def chain_profile(N: int, centers, x, k: int = 2, literal: bool = False):
    """Alternating kink/antikink superposition for an N-chain.

    ``centers`` are the positive positions c_1 < ... < c_J with N = 2J or 2J + 1.
    By default the sum is oriented so that u(-inf) = 0 and u(+inf) = (N mod 2) pi,
    i.e. the outermost pair is a kink/antikink pair bounding a plateau at +pi.
    ``literal=True`` drops that orientation factor (-1)^J.
    """
    c = np.atleast_1d(np.asarray(centers, dtype=float))
    J = c.size
    if N < 2 or N not in (2 * J, 2 * J + 1):
        raise ValueError(f"N={N} is inconsistent with {J} centers")
    if np.any(c <= 0) or np.any(np.diff(c) <= 0):
        raise ValueError("centers must be positive and strictly ascending")
    x = np.asarray(x, dtype=float)
    odd = N % 2 == 1
    total = kink(x, 0.0, k) if odd else np.zeros_like(x)
    for j, cj in enumerate(c, start=1):
        pair = kink(x, -cj, k) + kink(x, cj, k) if odd else kink(x, -cj, k) - kink(x, cj, k)
        total = total + (-1.0) ** j * pair
    if literal:
        return total
    return (-1.0) ** J * total


# -- energies ------------------------------------------------------------------

def _measure(grid: Grid) -> tuple[np.ndarray, np.ndarray]:
    y = grid.nodes
    w = 1.0 - y**2
    interior = w > 0
    return w, interior


def _parity_factor(grid: Grid) -> float:
    return 1.0 if grid.full_line else 2.0


def potential_density(state: FieldState, grid: Grid) -> np.ndarray:
    """Integrand of V in y: (1-y^2) u_y^2 / 8 + 2 k^2 sin^2 u / (1-y^2), zero at |y| = 1."""
    w, interior = _measure(grid)
    uy = grid.diff1 @ state.u
    k = state.params.k
    out = np.zeros_like(w)
    out[interior] = (w[interior] * uy[interior] ** 2 / 8.0
                     + 2.0 * k**2 * np.sin(state.u[interior]) ** 2 / w[interior])
    return out


def kinetic_density(state: FieldState, grid: Grid) -> np.ndarray:
    """Integrand of (1/2) int v^2 dx in y: 2 v^2 / (1 - y^2)."""
    w, interior = _measure(grid)
    out = np.zeros_like(w)
    out[interior] = 2.0 * state.v[interior] ** 2 / w[interior]
    return out


def potential_energy(state: FieldState, grid: Grid) -> float:
    """V = (1/2) int (u_x^2 + k^2 sin^2 u) dx over the whole line."""
    return _parity_factor(grid) * float(grid.quad_weights @ potential_density(state, grid))


# -- hyperboloidal evolution operator ------------------------------------------

class HyperboloidalSystem:
    """Method-of-lines form of the compactified k = 2 equation

        u_ss + 2y(1+y^2)/(1-y^2) u_sy + (y^4+6y^2+1)/(1-y^2)^2 u_s
            = (1/16)(1-y^2) d_y((1-y^2) u_y) - 2 sin(2u).

    Only nodes strictly inside the domain are evolved.  At y = 1 the field is
    pinned to its vacuum value with u_s = 0; at y = 0 a half-domain grid uses
    u_y = 0 (even) or u = pi/2, u_s = 0 (odd); a full-line grid pins u = 0 at
    y = -1 instead.
    """

    def __init__(self, grid: Grid, parity: Parity, params: ModelParams | None = None):
        params = params or ModelParams()
        if params.k != 2:
            raise NotImplementedError("the hyperboloidal equation is implemented for k = 2 only")
        self.grid = grid
        self.parity = Parity.parse(parity)
        self.params = params
        n = grid.n
        D1, D2 = grid.diff1, grid.diff2
        self.free = np.arange(1, n - 1)
        m = self.m = self.free.size

        # full = P @ free + g (separately for u and v)
        P = np.zeros((n, m))
        P[self.free, np.arange(m)] = 1.0
        gu = np.zeros(n)
        gv = np.zeros(n)
        gu[-1] = self.parity.degree * np.pi
        if grid.full_line:
            gu[0] = 0.0
        elif self.parity is Parity.EVEN:
            # u_0 from the Neumann row: sum_j D1[0, j] u_j = 0
            P[0, :] = -D1[0, 1:-1] / D1[0, 0]
            gu[0] = -D1[0, -1] * gu[-1] / D1[0, 0]
        else:
            gu[0] = np.pi / 2
        self.P, self.gu, self.gv = P, gu, gv

        y = grid.nodes[self.free]
        w = 1.0 - y**2
        self.y_free = y
        alpha = w**2 / 16.0
        beta = -y * w / 8.0
        adv = 2.0 * y * (1.0 + y**2) / w
        damp = (y**4 + 6.0 * y**2 + 1.0) / w**2
        Lu = alpha[:, None] * D2[self.free] + beta[:, None] * D1[self.free]
        self.Muu = Lu @ P
        self.cu = Lu @ gu
        self.Mvv = -(adv[:, None] * D1[self.free]) @ P - np.diag(damp)
        self.cv = -(adv * (D1[self.free] @ gv))

    # conversions between full nodal vectors and the evolved unknowns
    def pack(self, state: FieldState) -> np.ndarray:
        return np.concatenate([state.u[self.free], state.v[self.free]])

    def unpack(self, z: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        m = self.m
        u = self.P @ z[:m] + self.gu
        v = self.P @ z[m:] + self.gv
        return u, v

    def __call__(self, s: float, z: np.ndarray) -> np.ndarray:
        m = self.m
        u, v = z[:m], z[m:]
        dv = self.Muu @ u + self.cu - 2.0 * np.sin(2.0 * u) + self.Mvv @ v + self.cv
        return np.concatenate([v, dv])

    def jacobian(self, s: float, z: np.ndarray) -> np.ndarray:
        m = self.m
        J = np.zeros((2 * m, 2 * m))
        J[:m, m:] = np.eye(m)
        J[m:, :m] = self.Muu - np.diag(4.0 * np.cos(2.0 * z[:m]))
        J[m:, m:] = self.Mvv
        return J

    def time_derivative(self, state: FieldState) -> tuple[np.ndarray, np.ndarray]:
        """(u_s, v_s) on every node, boundary rows included."""
        z = self.pack(state)
        dz = self(state.s, z)
        du = self.P @ dz[: self.m]
        dv = self.P @ dz[self.m:]
        return du, dv

    @cached_property
    def min_spacing(self) -> float:
        return float(np.min(np.diff(self.grid.nodes)))


def check_finite(state: FieldState) -> None:
    for name in ("u", "v"):
        arr = getattr(state, name)
        bad = np.flatnonzero(~np.isfinite(arr))
        if bad.size:
            raise NonFiniteStateError(int(bad[0]), name)


def rhs(state: FieldState, grid: Grid) -> tuple[np.ndarray, np.ndarray]:
    """(du/ds, dv/ds) for ``state`` with the boundary treatment of :class:`HyperboloidalSystem`."""
    check_finite(state)
    return HyperboloidalSystem(grid, state.parity, state.params).time_derivative(state)


def enforce_boundary(state: FieldState, grid: Grid) -> FieldState:
    """Overwrite the constrained nodes of ``state`` with their boundary values."""
    system = HyperboloidalSystem(grid, state.parity, state.params)
    u, v = system.unpack(system.pack(state))
    return state.with_values(state.s, u, v)


# -- initial data ----------------------------------------------------------------

def _even_bump(y):
    y = np.asarray(y, dtype=float)
    out = np.zeros_like(y)
    inside = np.abs(y) < 1.0
    out[inside] = np.exp(-4.0 / (1.0 - y[inside] ** 2) ** 2 + 4.0)
    return out


def initial_data_even(b: float, grid: Grid, params: ModelParams | None = None) -> FieldState:
    """u = 0, u_s = b exp(4 - 4/(1-y^2)^2)."""
    if b < 0:
        raise ValueError("amplitude b must be non-negative")
    y = grid.nodes
    return FieldState(0.0, np.zeros_like(y), b * _even_bump(y), Parity.EVEN, params or ModelParams())


def odd_profile(b: float, y):
    y = np.asarray(y, dtype=float)
    sn = np.sin(np.pi * y / 2.0)
    cs = np.cos(np.pi * y / 2.0)
    return (np.pi / 2.0) * ((1.0 + sn) - 4.0 * b * sn * cs**2)


def initial_data_odd(b: float, grid: Grid, params: ModelParams | None = None) -> FieldState:
    """u = (pi/2)[1 + sin(pi y/2) - 4b sin(pi y/2) cos^2(pi y/2)], u_s = 0."""
    y = grid.nodes
    u = odd_profile(b, y)
    u[-1] = np.pi  # exact vacuum value at y = 1
    if not grid.full_line:
        u[0] = np.pi / 2
    else:
        u[0] = 0.0
    return FieldState(0.0, u, np.zeros_like(y), Parity.ODD, params or ModelParams())


def initial_data(family, b: float, grid: Grid, params: ModelParams | None = None) -> FieldState:
    family = Parity.parse(family)
    if family is Parity.EVEN:
        return initial_data_even(b, grid, params)
    return initial_data_odd(b, grid, params)


def static_state(parity, grid: Grid, params: ModelParams | None = None) -> FieldState:
    """Lowest-energy static state of a parity class: u = 0 (even) or the centred kink (odd)."""
    parity = Parity.parse(parity)
    y = grid.nodes
    if parity is Parity.EVEN:
        u = np.zeros_like(y)
    else:
        u = kink_in_y(y, (params or ModelParams()).k)
    return FieldState(0.0, u, np.zeros_like(y), parity, params or ModelParams())
