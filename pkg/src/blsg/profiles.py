"""Background shear profiles U(z) and their heat-evolved counterparts.

Built-in families:

* ``tanh_monotone``: U = U+ tanh(a z).  Monotone concave, no inflection
  point for z > 0; spectrally stable benchmark.
* ``inflectional_jet``: U = U+ (1 - (1 + a z + q (a z)^2) e^{-a z}).  The
  coefficient q defaults to 0 (the plain inflectional profile with
  U'' = U+ a^2 (1 - a z) e^{-a z}).  For q > 1/2 the profile develops a
  recirculating overshoot whose detached shear layer carries a strong
  inviscid instability; instability is always certified numerically by a
  Rayleigh scan, never assumed.
* ``custom_table``: quintic-spline interpolation of a two-column (z, U)
  table.

All built-ins satisfy U(0) = 0 and exponential decay of U - U+ and its
derivatives at a rate eta0 recorded on the profile.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import make_interp_spline
from scipy.special import erf

from .errors import DomainError, ParameterError, UnsupportedOrderError
from .grid import GridFunction, HalfLineGrid

TANH_MONOTONE = "tanh_monotone"
INFLECTIONAL_JET = "inflectional_jet"
CUSTOM_TABLE = "custom_table"
SYNTHETIC = "synthetic"


@dataclass
class ShearProfile:
    kind: str
    params: dict
    u_plus: float
    eta0: float
    c_k: tuple = None              # decay constants sup |d^k(U - U+ d_{k0})| e^{eta0 z}
    _spline: object = field(default=None, repr=False)
    _funcs: tuple = field(default=None, repr=False)   # synthetic only

    def __post_init__(self):
        if self.c_k is None:
            # window wide enough to catch polynomial-times-exponential maxima
            zs = np.linspace(0.0, 40.0 / max(self.eta0, 1e-3), 3001)
            cks = []
            for k in range(5):
                vals = eval_profile(self, k, zs)
                if k == 0:
                    vals = vals - self.u_plus
                cks.append(float(np.max(np.abs(vals) * np.exp(self.eta0 * zs))))
            self.c_k = tuple(cks)

    def sup_abs(self) -> float:
        zs = np.linspace(0.0, 20.0 / max(self.eta0, 1e-3), 4001)
        return float(np.max(np.abs(eval_profile(self, 0, zs))))


def tanh_profile(u_plus: float = 1.0, a: float = 1.0) -> ShearProfile:
    return ShearProfile(TANH_MONOTONE, {"a": a}, u_plus, eta0=2.0 * a)


def jet_profile(u_plus: float = 1.0, a: float = 3.0, q: float = 0.0) -> ShearProfile:
    # polynomial-times-exponential tail: any eta0 < a works; 0.9a keeps c_k modest
    return ShearProfile(INFLECTIONAL_JET, {"a": a, "q": q}, u_plus, eta0=0.9 * a)


def table_profile(z: np.ndarray, u: np.ndarray, u_plus: float = None,
                  eta0: float = 1.0) -> ShearProfile:
    z = np.asarray(z, dtype=float)
    u = np.asarray(u, dtype=float)
    if z.ndim != 1 or z.shape != u.shape or len(z) < 8:
        raise ParameterError("table needs matching 1-d arrays with >= 8 rows")
    if not np.all(np.diff(z) > 0):
        raise ParameterError("table heights must be strictly increasing")
    if abs(u[0]) > 1e-8 * max(1.0, np.max(np.abs(u))):
        raise ParameterError("profile must satisfy U(0) = 0")
    if u_plus is None:
        u_plus = float(u[-1])
    spline = make_interp_spline(z, u, k=5)
    p = ShearProfile(CUSTOM_TABLE, {"z_max_table": float(z[-1])}, float(u_plus),
                     eta0=eta0, _spline=spline)
    return p


def synthetic_profile(funcs, u_plus: float, eta0: float = 1.0) -> ShearProfile:
    """Test-only profile from explicit derivative callables (f0..f4).

    Not required to satisfy the physical invariants (used e.g. for U
    constant or linear where U'' vanishes identically).
    """
    return ShearProfile(SYNTHETIC, {}, u_plus, eta0, c_k=(0.0,) * 5, _funcs=tuple(funcs))


def eval_profile(p: ShearProfile, k: int, z) -> np.ndarray:
    """k-th derivative of U at heights z >= 0 (k = 0 is U itself)."""
    if k < 0 or k > 4:
        raise UnsupportedOrderError(f"profile derivative order {k} unsupported")
    z = np.asarray(z, dtype=float)
    scalar = z.ndim == 0
    z = np.atleast_1d(z)
    if np.any(z < 0):
        raise DomainError("profiles are defined on z >= 0")

    if p.kind == TANH_MONOTONE:
        out = _tanh_deriv(z, p.params["a"], p.u_plus, k)
    elif p.kind == INFLECTIONAL_JET:
        out = _jet_deriv(z, p.params["a"], p.params.get("q", 0.0), p.u_plus, k)
    elif p.kind == CUSTOM_TABLE:
        zc = np.clip(z, 0.0, p.params["z_max_table"])
        out = p._spline(zc, nu=k)
        if k == 0:
            out = np.where(z > p.params["z_max_table"], p.u_plus, out)
        else:
            out = np.where(z > p.params["z_max_table"], 0.0, out)
    elif p.kind == SYNTHETIC:
        out = np.asarray(p._funcs[k](z), dtype=float)
    else:
        raise ParameterError(f"unknown profile kind {p.kind!r}")
    return float(out[0]) if scalar else out


def _tanh_deriv(z, a, up, k):
    T = np.tanh(a * z)
    S = 1.0 - T * T
    if k == 0:
        return up * T
    if k == 1:
        return up * a * S
    if k == 2:
        return -2.0 * up * a**2 * S * T
    if k == 3:
        return 2.0 * up * a**3 * S * (3.0 * T * T - 1.0)
    return 8.0 * up * a**4 * S * T * (2.0 - 3.0 * T * T)


def _jet_deriv(z, a, q, up, k):
    az = a * z
    e = np.exp(-az)
    if k == 0:
        return up * (1.0 - (1.0 + az + q * az**2) * e)
    if k == 1:
        g1 = a * e * ((2 * q - 1.0) * az - q * az**2)
        return -up * g1
    if k == 2:
        g2 = a**2 * e * ((2 * q - 1.0) - (4 * q - 1.0) * az + q * az**2)
        return -up * g2
    if k == 3:
        g3 = a**3 * e * ((2.0 - 6 * q) + (6 * q - 1.0) * az - q * az**2)
        return -up * g3
    g4 = a**4 * e * ((12 * q - 3.0) + (1.0 - 8 * q) * az + q * az**2)
    return -up * g4


def profile_on_grid(p: ShearProfile, grid: HalfLineGrid, k: int = 0) -> np.ndarray:
    return eval_profile(p, k, grid.nodes)


def validate_profile(p: ShearProfile, n_sample: int = 3001) -> dict:
    """Check the decay hypotheses on a sample grid; returns the measured
    constants.  Raises ParameterError when U(0) != 0."""
    u0 = eval_profile(p, 0, 0.0)
    scale = max(1.0, abs(p.u_plus))
    if abs(u0) > 1e-8 * scale:
        raise ParameterError(f"U(0) = {u0}, expected 0")
    zs = np.linspace(0.0, 40.0 / p.eta0, n_sample)
    measured = {}
    for k in range(5):
        vals = eval_profile(p, k, zs)
        if k == 0:
            vals = vals - p.u_plus
        measured[k] = float(np.max(np.abs(vals) * np.exp(p.eta0 * zs)))
        if not np.isfinite(measured[k]):
            raise ParameterError(f"derivative order {k} violates e^(-eta0 z) decay")
    return measured


@dataclass
class HeatEvolvedProfile:
    """U_s(tau, .) and its second derivative on a grid, from heat flow of U.

    The half-line heat equation with U_s(tau, 0) = 0 is solved by the image
    method: the far-field constant is lifted by U+ erf(z / (2 sqrt(tau)))
    (the heat evolution of the odd-extended constant) and the decaying
    remainder U - U+ is convolved with the Dirichlet kernel
    K(z - y) - K(z + y).  The second derivative satisfies the same
    boundary-value problem with initial data U'' and is computed by the
    same convolution.
    """

    base: ShearProfile
    tau: float
    values: GridFunction
    dzz_values: GridFunction


def heat_evolve(p: ShearProfile, tau: float, grid: HalfLineGrid,
                n_panel: int = 10, n_gauss: int = 24) -> HeatEvolvedProfile:
    if tau < 0:
        raise DomainError("heat evolution requires tau >= 0")
    if tau == 0.0:
        u = profile_on_grid(p, grid, 0)
        u2 = profile_on_grid(p, grid, 2)
        return HeatEvolvedProfile(p, 0.0, GridFunction(grid, u), GridFunction(grid, u2))

    z = grid.nodes
    width = 10.0 * np.sqrt(tau)
    us = np.empty(grid.n)
    us2 = np.empty(grid.n)
    gx, gw = np.polynomial.legendre.leggauss(n_gauss)
    for j, zj in enumerate(z):
        lo, hi = max(0.0, zj - width), zj + width
        edges = np.linspace(lo, hi, n_panel + 1)
        mid = 0.5 * (edges[:-1] + edges[1:])
        half = 0.5 * np.diff(edges)
        y = (mid[:, None] + half[:, None] * gx[None, :]).ravel()
        wy = (half[:, None] * gw[None, :]).ravel()
        ker = _heat_kernel(zj - y, tau) - _heat_kernel(zj + y, tau)
        h = eval_profile(p, 0, y) - p.u_plus
        us[j] = p.u_plus * erf(zj / (2.0 * np.sqrt(tau))) + np.dot(wy, ker * h)
        us2[j] = np.dot(wy, ker * eval_profile(p, 2, y))
    us[0] = 0.0
    return HeatEvolvedProfile(p, tau, GridFunction(grid, us), GridFunction(grid, us2))


def _heat_kernel(x, tau):
    return np.exp(-x * x / (4.0 * tau)) / np.sqrt(4.0 * np.pi * tau)


def heat_evolve_fd_oracle(p: ShearProfile, tau: float, z_max: float, n: int,
                          safety: float = 0.4) -> tuple:
    """Explicit FTCS time stepper for the same Dirichlet problem; low-order
    oracle used only in tests."""
    z = np.linspace(0.0, z_max, n)
    h = z[1] - z[0]
    u = eval_profile(p, 0, z).copy()
    dt = safety * h * h
    steps = max(1, int(np.ceil(tau / dt)))
    dt = tau / steps
    for _ in range(steps):
        lap = np.empty_like(u)
        lap[1:-1] = (u[2:] - 2 * u[1:-1] + u[:-2]) / h**2
        u[1:-1] += dt * lap[1:-1]
        u[0] = 0.0
        u[-1] = p.u_plus
    return z, u
