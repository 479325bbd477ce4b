"""Boundary-layer weighted sup norms.

The one-dimensional norm with decay rate beta and layer order p is

    ||f||_{beta,gamma,p} = sup_z |f(z)| e^{beta z} W_p(z)^{-1},
    W_p(z) = 1 + sum_{q=1}^p delta^{-q} phi_{P-1+q}(z / delta),

with sublayer thickness delta = gamma nu^{1/4} and weight
phi_P(z) = 1/(1+z^P).  p = 0 drops the layer sum entirely (plain
exponentially weighted sup).  Two-variable norms sum mode norms against
nonnegative weights rho(alpha) with rho(0) = 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, IncompleteInputError, ParameterError
from .grid import GridFunction
from .modes import ModeFamily


def phi_weight(big_p_eff: float, z) -> np.ndarray:
    """Algebraic layer weight 1/(1 + z^P); value in (0, 1] for z >= 0."""
    if big_p_eff <= 0:
        raise ParameterError("weight exponent must be positive")
    z = np.asarray(z, dtype=float)
    if np.any(z < 0):
        raise DomainError("phi_weight defined for z >= 0")
    return 1.0 / (1.0 + z**big_p_eff)


@dataclass(frozen=True)
class BLNormParams:
    """Parameters (beta, gamma, P, p, nu) of the weighted norms."""

    beta: float
    gamma: float = 1.0
    big_p: float = 2.0
    p: int = 1
    nu: float = 1.0

    def __post_init__(self):
        if self.beta <= 0:
            raise ParameterError("beta must be positive")
        if self.gamma <= 0:
            raise ParameterError("gamma must be positive")
        if self.big_p <= 1:
            raise ParameterError("P > 1 is required by the product inequality")
        if self.p < 0:
            raise ParameterError("layer order p must be >= 0")
        if not (0 < self.nu <= 1):
            raise ParameterError("nu must lie in (0, 1]")

    @property
    def delta(self) -> float:
        """Sublayer thickness gamma * nu^(1/4); always recomputed."""
        return self.gamma * self.nu**0.25

    def with_p(self, p: int) -> "BLNormParams":
        return BLNormParams(self.beta, self.gamma, self.big_p, p, self.nu)


def layer_weight(prm: BLNormParams, z) -> np.ndarray:
    """W_p(z): the denominator of the weighted norm (>= 1)."""
    z = np.asarray(z, dtype=float)
    w = np.ones_like(z)
    d = prm.delta
    for q in range(1, prm.p + 1):
        w = w + d ** (-q) * phi_weight(prm.big_p - 1 + q, z / d)
    return w


@dataclass
class ModeWeights:
    """Nonnegative mode weights rho(alpha) with rho(0) = 0."""

    rho: dict
    alpha_set: tuple = None

    def __post_init__(self):
        self.rho = {int(a): float(r) for a, r in self.rho.items()}
        if any(r < 0 for r in self.rho.values()):
            raise ParameterError("mode weights must be nonnegative")
        if self.rho.get(0, 0.0) != 0.0:
            raise ParameterError("rho(0) = 0 is required")
        if self.alpha_set is None:
            self.alpha_set = tuple(sorted(a for a in self.rho if a != 0))
        else:
            self.alpha_set = tuple(sorted(int(a) for a in self.alpha_set))

    def weight(self, alpha: int) -> float:
        return self.rho.get(int(alpha), 0.0)

    @classmethod
    def one_over_alpha_sq(cls, alpha_max: int) -> "ModeWeights":
        rho = {0: 0.0}
        for a in range(1, alpha_max + 1):
            rho[a] = 1.0 / a**2
            rho[-a] = 1.0 / a**2
        return cls(rho)

    @classmethod
    def uniform(cls, alphas) -> "ModeWeights":
        rho = {0: 0.0}
        for a in alphas:
            if a != 0:
                rho[int(a)] = 1.0
        return cls(rho)


_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


def norm_1d(f: GridFunction, prm: BLNormParams, refine: bool = True) -> float:
    """Weighted sup over the grid plus a golden-section refinement pass.

    The discrete sup can miss a sublayer peak that falls between nodes; the
    refinement searches the interpolated |f| e^{beta z} / W_p around the
    discrete argmax.
    """
    z = f.grid.nodes
    vals = np.abs(f.values) * np.exp(prm.beta * z) / layer_weight(prm, z)
    i = int(np.argmax(vals))
    best = float(vals[i])
    if not refine or f.grid.n < 3:
        return best
    lo = z[max(i - 1, 0)]
    hi = z[min(i + 1, f.grid.n - 1)]
    if hi - lo <= 1e-14 * f.grid.z_max:
        return best

    def g(zz):
        fv = f.grid.interpolate(f.values, np.array([zz]))[0]
        return abs(fv) * math.exp(prm.beta * zz) / float(layer_weight(prm, zz))

    a, b = lo, hi
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    g1, g2 = g(x1), g(x2)
    for _ in range(40):
        if g1 < g2:
            a, x1, g1 = x1, x2, g2
            x2 = a + _GOLDEN * (b - a)
            g2 = g(x2)
        else:
            b, x2, g2 = x2, x1, g1
            x1 = b - _GOLDEN * (b - a)
            g1 = g(x1)
        if b - a < 1e-12 * max(1.0, hi):
            break
    return max(best, g1, g2)


def norm_2d(fam: ModeFamily, prm: BLNormParams, w: ModeWeights, k: int = None,
            refine: bool = True) -> float:
    """sum_alpha rho(alpha) ||f_alpha||_{beta,gamma,k}; k defaults to prm.p."""
    p = prm.p if k is None else k
    prm_k = prm.with_p(p)
    total = 0.0
    for alpha in w.alpha_set:
        r = w.weight(alpha)
        if r == 0.0:
            continue
        if alpha not in fam.modes:
            raise IncompleteInputError(f"mode alpha={alpha} required by weights")
        total += r * norm_1d(fam.mode(alpha), prm_k, refine=refine)
    return total


def sobolev_bl_norm(omega: ModeFamily, s: int, prm: BLNormParams, w: ModeWeights,
                    refine: bool = True) -> float:
    """Boundary-layer Sobolev norm: sum over a+b <= s of the (1+b)-layer norms
    of d_x^a d_z^b omega, with d_x acting as multiplication by (i alpha)."""
    if s < 0:
        raise DomainError("Sobolev order must be >= 0")
    total = 0.0
    dz_cache = {0: omega}
    for b in range(0, s + 1):
        if b not in dz_cache:
            dz_cache[b] = dz_cache[b - 1].dz(1)
        fam_b = dz_cache[b]
        for a in range(0, s - b + 1):
            fam_ab = fam_b.dx(a) if a else fam_b
            total += norm_2d(fam_ab, prm, w, k=1 + b, refine=refine)
    return total
