"""Chebyshev-Gauss-Lobatto collocation on [0, 1] (or [-1, 1]).

Nodes are returned in ascending order. The differentiation matrix uses the
trigonometric form of the node differences and the negative-sum trick for the
diagonal, which keeps row sums at round-off level.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

MIN_NODES = 8
_NODE_SNAP = 1e-15


@dataclass(frozen=True)
class Grid:
    """Collocation grid with derivative and quadrature operators.

    ``full_line`` grids cover y in [-1, 1]; the default half-domain grid covers
    [0, 1] and relies on a parity condition at y = 0.
    """

    n: int
    nodes: np.ndarray
    diff1: np.ndarray
    diff2: np.ndarray
    quad_weights: np.ndarray
    bary_weights: np.ndarray = field(repr=False)
    full_line: bool = False

    @property
    def lo(self) -> float:
        return float(self.nodes[0])

    @property
    def hi(self) -> float:
        return float(self.nodes[-1])


def _cheb_diff_reference(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Descending nodes cos(j pi / N) on [-1, 1] and their derivative matrix."""
    N = n - 1
    j = np.arange(n)
    x = np.sin(np.pi * (N - 2 * j) / (2 * N))  # = cos(j pi / N), symmetric to round-off
    c = np.ones(n)
    c[0] = c[-1] = 2.0
    c *= (-1.0) ** j
    # x_i - x_j = 2 sin((i + j) pi / 2N) sin((j - i) pi / 2N)
    ii, jj = np.meshgrid(j, j, indexing="ij")
    dx = 2.0 * np.sin(np.pi * (ii + jj) / (2 * N)) * np.sin(np.pi * (jj - ii) / (2 * N))
    np.fill_diagonal(dx, 1.0)
    D = np.outer(c, 1.0 / c) / dx
    np.fill_diagonal(D, 0.0)
    D -= np.diag(D.sum(axis=1))
    return x, D


def _clenshaw_curtis(n: int) -> np.ndarray:
    """Clenshaw-Curtis weights for the nodes cos(j pi / N) on [-1, 1]."""
    N = n - 1
    theta = np.pi * np.arange(n) / N
    w = np.zeros(n)
    v = np.ones(N - 1)
    inner = theta[1:-1]
    if N % 2 == 0:
        w[0] = w[-1] = 1.0 / (N**2 - 1)
        for k in range(1, N // 2):
            v -= 2.0 * np.cos(2 * k * inner) / (4 * k**2 - 1)
        v -= np.cos(N * inner) / (N**2 - 1)
    else:
        w[0] = w[-1] = 1.0 / N**2
        for k in range(1, (N - 1) // 2 + 1):
            v -= 2.0 * np.cos(2 * k * inner) / (4 * k**2 - 1)
    w[1:-1] = 2.0 * v / N
    return w


def make_grid(n: int, full_line: bool = False) -> Grid:
    """Build an ``n``-node Chebyshev-Gauss-Lobatto grid.

    The half-domain grid maps the reference points x_j = cos(j pi/(n-1)) to
    y = (1 - x)/2, so the nodes run from 0 to 1 in ascending order; the
    full-line grid uses y = -x.
    """
    if int(n) != n or n < MIN_NODES:
        raise ValueError(f"grid needs at least {MIN_NODES} nodes, got {n}")
    n = int(n)
    x, D = _cheb_diff_reference(n)
    scale = 0.5 if not full_line else 1.0
    if full_line:
        nodes = -x
    else:
        nodes = 0.5 * (1.0 - x)
    nodes[0], nodes[-1] = (-1.0 if full_line else 0.0), 1.0
    # both maps reverse orientation, so the descending reference order becomes
    # ascending in y and d/dy = -(1/scale) d/dx
    D1 = (-1.0 / scale) * D
    D2 = D1 @ D1
    w = scale * _clenshaw_curtis(n)
    bary = (-1.0) ** np.arange(n)
    bary[0] *= 0.5
    bary[-1] *= 0.5
    for arr in (nodes, D1, D2, w, bary):
        arr.setflags(write=False)
    return Grid(n=n, nodes=nodes, diff1=D1, diff2=D2, quad_weights=w,
                bary_weights=bary, full_line=full_line)


def _check_point(grid: Grid, point: float) -> None:
    if not (grid.lo <= point <= grid.hi) or not np.isfinite(point):
        raise ValueError(f"point {point} outside [{grid.lo}, {grid.hi}]")


def interpolate(grid: Grid, values, point: float) -> float:
    """Barycentric Lagrange interpolant of ``values`` evaluated at ``point``."""
    values = np.asarray(values, dtype=float)
    if values.shape != (grid.n,):
        raise ValueError(f"expected {grid.n} samples, got shape {values.shape}")
    point = float(point)
    _check_point(grid, point)
    diff = point - grid.nodes
    # closer than round-off to a node: the weights would overflow
    hit = np.flatnonzero(np.abs(diff) <= _NODE_SNAP)
    if hit.size:
        return float(values[hit[0]])
    q = grid.bary_weights / diff
    return float(np.dot(q, values) / q.sum())


def interpolate_many(grid: Grid, values, points) -> np.ndarray:
    """Vectorised :func:`interpolate` (no domain check beyond finiteness)."""
    values = np.asarray(values, dtype=float)
    points = np.atleast_1d(np.asarray(points, dtype=float))
    diff = points[:, None] - grid.nodes[None, :]
    exact = np.abs(diff) <= _NODE_SNAP
    with np.errstate(divide="ignore", invalid="ignore"):
        q = grid.bary_weights[None, :] / diff
        out = (q @ values) / q.sum(axis=1)
    rows, cols = np.nonzero(exact)
    rows, first = np.unique(rows, return_index=True)
    out[rows] = values[cols[first]]
    return out


def find_crossings(grid: Grid, values, level: float = 0.0, xtol: float = 1e-12) -> list[float]:
    """All points where the interpolant of ``values`` equals ``level``.

    Brackets come from sign changes between neighbouring nodes; each bracket is
    refined with Brent's method on the global interpolant.
    """
    values = np.asarray(values, dtype=float)
    d = values - level
    nodes = grid.nodes
    roots: list[float] = []
    for j in np.flatnonzero(d == 0.0):
        roots.append(float(nodes[j]))
    s = np.sign(d)
    for j in np.flatnonzero(s[:-1] * s[1:] < 0):
        a, b = float(nodes[j]), float(nodes[j + 1])
        f = lambda p: interpolate(grid, values, p) - level  # noqa: E731
        fa, fb = f(a), f(b)
        if fa == 0.0 or fb == 0.0 or fa * fb > 0:
            # interpolant and samples disagree only at round-off level
            roots.append(a if abs(fa) <= abs(fb) else b)
            continue
        roots.append(brentq(f, a, b, xtol=xtol, rtol=4 * np.finfo(float).eps))
    return sorted(set(roots))


def integrate(grid: Grid, values) -> float:
    """Clenshaw-Curtis quadrature of sampled ``values`` over the grid interval."""
    return float(np.dot(grid.quad_weights, values))
