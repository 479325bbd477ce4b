"""Half-line grids: discretization, differentiation, interpolation, quadrature.

Two schemes are provided.  ``chebyshev_mapped`` places Chebyshev-Lobatto
points under the rational map

    z(xi) = A (1 + xi) / (B - xi),   xi in [-1, 1],

with A, B chosen so z(-1) = 0, z(1) = z_max and z(0) = map_scale, which
clusters nodes near z = 0 on the scale ``map_scale``.  ``uniform_fd`` is a
plain equispaced grid with second-order stencils and serves as the
independent low-order oracle for everything computed spectrally.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError, UnsupportedOrderError

CHEBYSHEV_MAPPED = "chebyshev_mapped"
UNIFORM_FD = "uniform_fd"

MAX_DERIVATIVE_ORDER = 4


def _cheb_lobatto(n):
    # increasing in [-1, 1]
    return -np.cos(np.pi * np.arange(n) / (n - 1))


def _cheb_diff_matrix(xi):
    n = len(xi)
    c = np.ones(n)
    c[0] = c[-1] = 2.0
    c *= (-1.0) ** np.arange(n)
    dx = xi[:, None] - xi[None, :] + np.eye(n)
    D = np.outer(c, 1.0 / c) / dx
    D -= np.diag(D.sum(axis=1))
    return D


def _clenshaw_curtis_weights(n):
    # weights on [-1, 1] at Lobatto points; positive for all n
    N = n - 1
    theta = np.pi * np.arange(1, N) / N
    v = np.ones(N - 1)
    for k in range(1, N // 2 + 1):
        factor = 1.0 if 2 * k == N else 2.0
        v -= factor * np.cos(2 * k * theta) / (4 * k * k - 1)
    w = np.empty(n)
    w[1:-1] = 2.0 * v / N
    w[0] = w[-1] = 1.0 / (N * N - 1 + (N % 2))
    return w


@dataclass(frozen=True, eq=False)
class HalfLineGrid:
    """Truncated half-line discretization shared by all solvers.

    Attributes:
        z_max: truncation height.
        n: node count.
        nodes: strictly increasing sample points, nodes[0]=0, nodes[-1]=z_max.
        quad_weights: positive quadrature weights summing to z_max.
        scheme: "chebyshev_mapped" or "uniform_fd".
        map_scale: clustering scale of the rational map (mapped scheme only).
    """

    z_max: float
    n: int
    nodes: np.ndarray
    quad_weights: np.ndarray
    scheme: str
    map_scale: float
    _diff1: np.ndarray = field(repr=False, compare=False, default=None)
    _xi: np.ndarray = field(repr=False, compare=False, default=None)

    def diff_matrix(self, order: int = 1) -> np.ndarray:
        """Dense differentiation matrix d^k/dz^k."""
        if order < 1 or order > MAX_DERIVATIVE_ORDER:
            raise UnsupportedOrderError(
                f"derivative order {order} not supported (1..{MAX_DERIVATIVE_ORDER})")
        D = self._diff1
        out = D.copy()
        for _ in range(order - 1):
            out = D @ out
        return out

    def interpolate(self, values: np.ndarray, z: np.ndarray) -> np.ndarray:
        """Evaluate the grid interpolant of `values` at points `z`."""
        z = np.atleast_1d(np.asarray(z, dtype=float))
        if self.scheme == CHEBYSHEV_MAPPED:
            return _barycentric_eval(self._xi, values, self._xi_of_z(z))
        vr = np.interp(z, self.nodes, np.real(values))
        if not np.iscomplexobj(values):
            return vr
        return vr + 1j * np.interp(z, self.nodes, np.imag(values))

    def _xi_of_z(self, z):
        A, B = self._map_coeffs()
        return (B * z - A) / (z + A)

    def _map_coeffs(self):
        B = self.z_max / (self.z_max - 2.0 * self.map_scale)
        A = self.map_scale * B
        return A, B

    def max_resolved_wavenumber(self, points_per_wavelength: float = 6.0) -> float:
        """Largest oscillation wavenumber the interior spacing can carry."""
        inner = self.nodes[self.nodes <= 0.7 * self.z_max]
        h = np.max(np.diff(inner)) if len(inner) > 2 else self.z_max / self.n
        return 2.0 * np.pi / (points_per_wavelength * h)

    def antiderivative_matrix(self) -> np.ndarray:
        """Matrix Q with (Q f)_j ~ int_0^{z_j} f; spectral on mapped grids."""
        D = self._diff1.copy()
        D[0, :] = 0.0
        D[0, 0] = 1.0
        Q = np.linalg.inv(D)
        Q[:, 0] = 0.0
        return Q


def _barycentric_eval(xi, values, xq):
    n = len(xi)
    wts = np.ones(n)
    wts[0] = wts[-1] = 0.5
    wts *= (-1.0) ** np.arange(n)
    diff = xq[:, None] - xi[None, :]
    exact = np.isclose(diff, 0.0, atol=1e-15)
    diff = np.where(exact, 1.0, diff)
    ratio = wts[None, :] / diff
    out = (ratio @ values) / ratio.sum(axis=1)
    hit_rows, hit_cols = np.nonzero(exact)
    out[hit_rows] = values[hit_cols]
    return out


def make_grid(scheme: str, n: int, z_max: float, map_scale: float = 2.0) -> HalfLineGrid:
    """Build a half-line grid.

    chebyshev_mapped requires z_max > 2*map_scale so the rational map has its
    pole outside [-1, 1].
    """
    if n < 8:
        raise ParameterError(f"need n >= 8 nodes, got {n}")
    if z_max <= 0 or map_scale <= 0:
        raise ParameterError("z_max and map_scale must be positive")

    if scheme == UNIFORM_FD:
        nodes = np.linspace(0.0, z_max, n)
        h = z_max / (n - 1)
        w = np.full(n, h)
        w[0] = w[-1] = h / 2.0
        D = _uniform_diff1(n, h)
        return HalfLineGrid(z_max, n, nodes, w, scheme, map_scale, D, None)

    if scheme == CHEBYSHEV_MAPPED:
        if z_max <= 2.0 * map_scale:
            raise ParameterError("chebyshev_mapped needs z_max > 2*map_scale")
        xi = _cheb_lobatto(n)
        B = z_max / (z_max - 2.0 * map_scale)
        A = map_scale * B
        nodes = A * (1.0 + xi) / (B - xi)
        nodes[0] = 0.0
        nodes[-1] = z_max
        dz = A * (B + 1.0) / (B - xi) ** 2
        D = _cheb_diff_matrix(xi) / dz[:, None]
        w = _clenshaw_curtis_weights(n) * dz
        w *= z_max / w.sum()   # constants integrate exactly
        return HalfLineGrid(z_max, n, nodes, w, scheme, map_scale, D, xi)

    raise ParameterError(f"unknown scheme {scheme!r}")


def _uniform_diff1(n, h):
    D = np.zeros((n, n))
    i = np.arange(1, n - 1)
    D[i, i - 1] = -0.5 / h
    D[i, i + 1] = 0.5 / h
    D[0, :3] = np.array([-1.5, 2.0, -0.5]) / h
    D[-1, -3:] = np.array([0.5, -2.0, 1.5]) / h
    return D


def _uniform_diff2(n, h):
    D = np.zeros((n, n))
    i = np.arange(1, n - 1)
    D[i, i - 1] = 1.0 / h**2
    D[i, i] = -2.0 / h**2
    D[i, i + 1] = 1.0 / h**2
    D[0, :4] = np.array([2.0, -5.0, 4.0, -1.0]) / h**2
    D[-1, -4:] = np.array([-1.0, 4.0, -5.0, 2.0]) / h**2
    return D


@dataclass
class GridFunction:
    """Complex scalar samples on a HalfLineGrid."""

    grid: HalfLineGrid
    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != (self.grid.n,):
            raise ParameterError(
                f"values shape {self.values.shape} != grid size {self.grid.n}")
        if not np.all(np.isfinite(self.values)):
            raise ParameterError("GridFunction values must be finite")

    def __add__(self, other):
        return GridFunction(self.grid, self.values + _vals(other))

    def __sub__(self, other):
        return GridFunction(self.grid, self.values - _vals(other))

    def __mul__(self, other):
        return GridFunction(self.grid, self.values * _vals(other))

    __rmul__ = __mul__

    def __truediv__(self, other):
        return GridFunction(self.grid, self.values / _vals(other))

    def abs_max(self) -> float:
        return float(np.max(np.abs(self.values)))


def _vals(x):
    return x.values if isinstance(x, GridFunction) else x


def differentiate(f: GridFunction, order: int = 1) -> GridFunction:
    """k-th z-derivative; spectral on mapped grids, 2nd-order stencils on uniform.

    Uniform grids use the classic centered second difference for k=2 (exact on
    quadratics) and compositions for k=3,4.
    """
    if order < 1 or order > MAX_DERIVATIVE_ORDER:
        raise UnsupportedOrderError(
            f"derivative order {order} not supported (1..{MAX_DERIVATIVE_ORDER})")
    g = f.grid
    if g.scheme == UNIFORM_FD:
        h = g.z_max / (g.n - 1)
        D1 = g._diff1
        D2 = _uniform_diff2(g.n, h)
        mats = {1: D1, 2: D2, 3: D1 @ D2, 4: D2 @ D2}
        return GridFunction(g, mats[order] @ f.values)
    return GridFunction(g, g.diff_matrix(order) @ f.values)


def integrate(f: GridFunction) -> complex:
    """Quadrature of f over [0, z_max], approximating the half-line integral."""
    return complex(np.dot(f.grid.quad_weights, f.values))


def grid_function(grid: HalfLineGrid, fn) -> GridFunction:
    """Sample a callable fn(z) onto the grid."""
    return GridFunction(grid, np.asarray(fn(grid.nodes), dtype=complex))
