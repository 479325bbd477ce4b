"""Per-mode families: two-variable fields f(x, z) = sum_alpha e^{i alpha x} f_alpha(z)."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import IncompleteInputError, ParameterError
from .grid import GridFunction, HalfLineGrid


@dataclass
class ModeFamily:
    """Finite collection of Fourier modes over a shared half-line grid."""

    grid: HalfLineGrid
    modes: dict = field(default_factory=dict)   # alpha (int) -> complex ndarray

    def __post_init__(self):
        clean = {}
        for alpha, vals in self.modes.items():
            vals = np.asarray(vals, dtype=complex)
            if vals.shape != (self.grid.n,):
                raise ParameterError(f"mode {alpha}: wrong length {vals.shape}")
            clean[int(alpha)] = vals
        self.modes = clean

    @property
    def alphas(self):
        return sorted(self.modes)

    def mode(self, alpha: int) -> GridFunction:
        if alpha not in self.modes:
            raise IncompleteInputError(f"mode alpha={alpha} missing")
        return GridFunction(self.grid, self.modes[alpha])

    def get(self, alpha: int) -> np.ndarray:
        if alpha not in self.modes:
            raise IncompleteInputError(f"mode alpha={alpha} missing")
        return self.modes[alpha]

    def map(self, fn) -> "ModeFamily":
        """New family with values fn(alpha, values) per mode."""
        return ModeFamily(self.grid, {a: fn(a, v) for a, v in self.modes.items()})

    def __add__(self, other):
        out = {a: v.copy() for a, v in self.modes.items()}
        for a, v in other.modes.items():
            out[a] = out.get(a, 0.0) + v
        return ModeFamily(self.grid, out)

    def scaled(self, s) -> "ModeFamily":
        return ModeFamily(self.grid, {a: s * v for a, v in self.modes.items()})

    def dx(self, power: int = 1) -> "ModeFamily":
        """Tangential derivative: multiplication by (i alpha)^power per mode."""
        return ModeFamily(
            self.grid, {a: (1j * a) ** power * v for a, v in self.modes.items()})

    def dz(self, order: int = 1) -> "ModeFamily":
        D = self.grid.diff_matrix(order)
        return ModeFamily(self.grid, {a: D @ v for a, v in self.modes.items()})

    def is_conjugate_symmetric(self, tol: float = 1e-10) -> bool:
        for a, v in self.modes.items():
            if -a not in self.modes:
                return False
            if np.max(np.abs(self.modes[-a] - np.conj(v))) > tol * max(
                    1.0, np.max(np.abs(v))):
                return False
        return True

    def to_physical(self, n_x: int) -> np.ndarray:
        """Evaluate on the uniform torus grid x_j = 2 pi j / n_x; shape (n_x, n_z)."""
        x = 2.0 * np.pi * np.arange(n_x) / n_x
        out = np.zeros((n_x, self.grid.n), dtype=complex)
        for a, v in self.modes.items():
            out += np.exp(1j * a * x)[:, None] * v[None, :]
        return out


def convolve(f: ModeFamily, g: ModeFamily, alpha_keep=None) -> ModeFamily:
    """Truncated mode convolution (fg)_m = sum_{k+l=m} f_k g_l.

    The sum over retained indices is exact (direct summation, no aliasing);
    `alpha_keep` restricts the output modes.
    """
    if f.grid is not g.grid:
        raise ParameterError("mode families live on different grids")
    out = {}
    for k, fv in f.modes.items():
        for l, gv in g.modes.items():
            m = k + l
            if alpha_keep is not None and m not in alpha_keep:
                continue
            if m in out:
                out[m] = out[m] + fv * gv
            else:
                out[m] = fv * gv
    return ModeFamily(f.grid, out)
