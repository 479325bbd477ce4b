"""Orr-Sommerfeld boundary-value machinery on the half line.

The fourth-order problem

    OS(psi) = -eps Lap^2 psi + (U - c) Lap psi - U'' psi = f,
    psi(0) = psi'(0) = 0,  decay as z -> infinity,  eps = sqrt(nu)/(i alpha),

is discretized in coupled (psi, theta) form with theta = Lap psi, so only
second derivatives ever appear (the clustered grid makes direct fourth
derivatives numerically hostile).  Boundary rows impose psi and psi' at both
ends; truncation replaces decay by homogeneous conditions at z_max.

Eigenvalue problems (Rayleigh and OS) are linear pencils in the phase speed
c and are solved by QZ with a spurious-mode filter: eigenvalues must
reproduce under a resolution change and carry a small discrete residual.

The Evans function is computed independently of any grid by compound-matrix
integration of the two decaying solutions from z_max down to the wall, with
the exponential growth factored out analytically.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import eig, lu_factor, lu_solve

from .errors import (NearEigenvalueError, ParameterError, SplittingError,
                     UnsupportedModeError)
from .grid import GridFunction, HalfLineGrid
from .profiles import ShearProfile, eval_profile, profile_on_grid


@dataclass(frozen=True)
class SpectralPoint:
    """One point (alpha, lambda) of the resolvent problem with derived scales."""

    alpha: int
    lam: complex
    nu: float

    def __post_init__(self):
        if self.alpha == 0:
            raise UnsupportedModeError("alpha = 0 is excluded from the analysis")
        if not (0 < self.nu <= 1):
            raise ParameterError("nu must lie in (0, 1]")

    @property
    def c(self) -> complex:
        return 1j * self.lam / self.alpha

    @property
    def eps(self) -> complex:
        return np.sqrt(self.nu) / (1j * self.alpha)

    @property
    def sqrt_eps(self) -> complex:
        r = np.sqrt(complex(self.eps))
        return r if r.real > 0 else -r

    @classmethod
    def from_c(cls, alpha: int, c: complex, nu: float) -> "SpectralPoint":
        return cls(alpha, -1j * alpha * c, nu)


@dataclass
class FastSlowScales:
    """Fast rate profile mu_f(z) = nu^{-1/4} sqrt(lam + i alpha U + alpha^2 sqrt(nu))
    (branch with Re >= 0), slow rate mu_s = alpha."""

    mu_s: float
    mu_f_profile: GridFunction
    m_f: float                 # inf_z Re mu_f
    big_m_f: float             # sup_z |mu_f|
    on_branch_cut: bool


def scales(pt: SpectralPoint, profile: ShearProfile, grid: HalfLineGrid,
           cut_tol: float = 1e-12) -> FastSlowScales:
    U = profile_on_grid(profile, grid)
    arg = pt.lam + 1j * pt.alpha * U + pt.alpha**2 * np.sqrt(pt.nu)
    on_cut = bool(np.any((arg.real < 0) & (np.abs(arg.imag) <= cut_tol * np.abs(arg.real))))
    mu = pt.nu ** (-0.25) * np.sqrt(arg.astype(complex))
    mu = np.where(mu.real < 0, -mu, mu)
    return FastSlowScales(
        mu_s=float(abs(pt.alpha)),
        mu_f_profile=GridFunction(grid, mu),
        m_f=float(np.min(mu.real)),
        big_m_f=float(np.max(np.abs(mu))),
        on_branch_cut=on_cut,
    )


class OSOperator:
    """Discrete OS problem for fixed (alpha, nu, profile, grid).

    Holds the alpha-shifted Laplacian, assembles the (psi, theta) block
    matrix per phase speed c, and caches LU factorizations keyed by c.
    The cache is append-only; entries are never mutated after creation.
    """

    def __init__(self, alpha: int, nu: float, profile: ShearProfile,
                 grid: HalfLineGrid):
        if alpha == 0:
            raise UnsupportedModeError("alpha = 0 is excluded")
        self.alpha = int(alpha)
        self.nu = float(nu)
        self.profile = profile
        self.grid = grid
        n = grid.n
        self.n = n
        D = grid.diff_matrix(1)
        self.D = D
        self.lap = D @ D - alpha**2 * np.eye(n)
        self.U = profile_on_grid(profile, grid, 0)
        self.U2 = profile_on_grid(profile, grid, 2)
        self.eps = np.sqrt(nu) / (1j * alpha)
        self._lu_cache = {}
        self._kinv = None

    # -- block system ------------------------------------------------------

    def block_matrix(self, c: complex) -> np.ndarray:
        n = self.n
        A = np.zeros((2 * n, 2 * n), dtype=complex)
        A[1:n - 1, :n] = self.lap[1:n - 1]
        A[1:n - 1, n:] -= np.eye(n)[1:n - 1]
        A[0, 0] = 1.0
        A[n - 1, n - 1] = 1.0
        A[n + 1:2 * n - 1, :n] = -np.diag(self.U2)[1:n - 1]
        dyn = -self.eps * self.lap + np.diag(self.U - c)
        A[n + 1:2 * n - 1, n:] = dyn[1:n - 1]
        A[n, :n] = self.D[0]
        A[2 * n - 1, :n] = self.D[-1]
        return A

    def _factor(self, c: complex, cache: bool = True):
        key = (round(float(c.real), 14), round(float(c.imag), 14))
        hit = self._lu_cache.get(key)
        if hit is not None:
            return hit
        A = self.block_matrix(c)
        lu, piv = lu_factor(A)
        d = np.abs(np.diag(lu))
        pivot_ratio = d.min() / max(d.max(), 1e-300)
        if not np.isfinite(pivot_ratio) or pivot_ratio < 1e-15:
            raise NearEigenvalueError(
                f"OS solve near-singular at alpha={self.alpha}, c={c:.6g}",
                alpha=self.alpha, c=c, cond=1.0 / max(pivot_ratio, 1e-300))
        if cache and len(self._lu_cache) < 64:
            self._lu_cache[key] = (lu, piv)
        return lu, piv

    def solve(self, c: complex, f_values: np.ndarray, cache: bool = True):
        """Solve OS(psi) = f; returns (psi, theta = Lap psi) as arrays."""
        n = self.n
        rhs = np.zeros(2 * n, dtype=complex)
        rhs[n + 1:2 * n - 1] = f_values[1:n - 1]
        y = lu_solve(self._factor(c, cache=cache), rhs)
        return y[:n], y[n:]

    def solve_many(self, c: complex, f_matrix: np.ndarray, cache: bool = True):
        """Solve for several right-hand sides (columns of f_matrix)."""
        n = self.n
        m = f_matrix.shape[1]
        rhs = np.zeros((2 * n, m), dtype=complex)
        rhs[n + 1:2 * n - 1, :] = f_matrix[1:n - 1, :]
        y = lu_solve(self._factor(c, cache=cache), rhs)
        return y[:n], y[n:]

    def resolvent(self, lam: complex, omega: np.ndarray) -> np.ndarray:
        """theta = (lam - L_alpha)^{-1} omega via the stream-function solve."""
        c = 1j * lam / self.alpha
        psi, theta = self.solve(c, omega / (1j * self.alpha))
        return theta

    def greens(self, c: complex, source_indices) -> tuple:
        """Columns G(x_i, .) and Lap G(x_i, .) for grid-node sources x_i,
        using the quadrature-dual discrete delta."""
        n = self.n
        idx = np.atleast_1d(np.asarray(source_indices, dtype=int))
        if np.any((idx < 1) | (idx > n - 2)):
            raise ParameterError("Green sources must be interior grid nodes")
        F = np.zeros((n, len(idx)), dtype=complex)
        for col, i in enumerate(idx):
            F[i, col] = 1.0 / self.grid.quad_weights[i]
        G, lapG = self.solve_many(c, F)
        return G, lapG

    # -- theta-space bordered resolvent (independent discrete route) -------

    def _k_inverse(self):
        # Lap^{-1} with Dirichlet rows at both ends
        if self._kinv is None:
            n = self.n
            M = self.lap.copy()
            M[0, :] = 0.0
            M[0, 0] = 1.0
            M[-1, :] = 0.0
            M[-1, -1] = 1.0
            K = np.linalg.inv(M)
            K[:, 0] = 0.0
            K[:, -1] = 0.0
            self._kinv = K
        return self._kinv

    def resolvent_direct(self, lam: complex, omega: np.ndarray) -> np.ndarray:
        """(lam - L_alpha)^{-1} omega assembled in vorticity variables:
        L theta = sqrt(nu) Lap theta - i alpha U theta + i alpha U'' K theta,
        closed by psi'(0) = psi'(z_max) = 0 expressed through K = Lap^{-1}."""
        n = self.n
        K = self._k_inverse()
        ia = 1j * self.alpha
        M = (lam * np.eye(n) - np.sqrt(self.nu) * self.lap
             + ia * np.diag(self.U) - ia * np.diag(self.U2) @ K)
        DK = self.D @ K
        M[0, :] = DK[0, :]
        M[-1, :] = DK[-1, :]
        rhs = omega.astype(complex).copy()
        rhs[0] = 0.0
        rhs[-1] = 0.0
        return np.linalg.solve(M, rhs)



def os_solve(pt: SpectralPoint, profile: ShearProfile, f: GridFunction,
             op: OSOperator = None) -> GridFunction:
    """Stream function psi with OS(psi) = f under the wall/decay conditions."""
    op = op or OSOperator(pt.alpha, pt.nu, profile, f.grid)
    psi, _ = op.solve(pt.c, f.values)
    return GridFunction(f.grid, psi)


def os_green(pt: SpectralPoint, profile: ShearProfile, grid: HalfLineGrid,
             x: float, op: OSOperator = None) -> tuple:
    """G(x, .) and Lap G(x, .) for a source at the grid node nearest x."""
    op = op or OSOperator(pt.alpha, pt.nu, profile, grid)
    i = int(np.argmin(np.abs(grid.nodes - x)))
    i = min(max(i, 1), grid.n - 2)
    G, lapG = op.greens(pt.c, [i])
    return GridFunction(grid, G[:, 0]), GridFunction(grid, lapG[:, 0]), grid.nodes[i]


# ---------------------------------------------------------------------------
# analytic fast kernel and residual kernel


def mu_f_antiderivative(pt: SpectralPoint, profile: ShearProfile,
                        grid: HalfLineGrid) -> np.ndarray:
    """S(z) = int_0^z mu_f(y) dy at the grid nodes (spectral cumulative)."""
    s = scales(pt, profile, grid)
    Q = grid.antiderivative_matrix()
    return Q @ s.mu_f_profile.values, s


def green_fast_analytic(pt: SpectralPoint, profile: ShearProfile,
                        grid: HalfLineGrid, normalization: str = "paper"):
    """Leading-order fast Green kernel as a dense (source, target) matrix.

    G_a(x, z) = pref(x) * exp(-|int_x^z mu_f|-oriented), the decay always
    pointing away from the source.  `normalization` selects the prefactor:
    "paper" uses 1/(eps mu_f(x)); "exact" uses 1/(2 eps mu_f(x)), which is
    the true constant-coefficient kernel (they differ by the factor 2 the
    asymptotic statement absorbs).  The O(eps) correction is not modeled.
    """
    S, s = mu_f_antiderivative(pt, profile, grid)
    mu = s.mu_f_profile.values
    diff = S[None, :] - S[:, None]          # int_x^z, rows = source x
    orient = np.sign(grid.nodes[None, :] - grid.nodes[:, None])
    orient[orient == 0] = 1.0
    expo = -orient * diff
    # Re(expo) <= 0 up to roundoff by the branch choice
    pref = 1.0 / (pt.eps * mu)
    if normalization == "exact":
        pref = pref / 2.0
    elif normalization != "paper":
        raise ParameterError("normalization must be 'paper' or 'exact'")
    return pref[:, None] * np.exp(expo), s


def green_residual(pt: SpectralPoint, profile: ShearProfile, grid: HalfLineGrid,
                   x: float, op: OSOperator = None,
                   normalization: str = "paper") -> GridFunction:
    """R_G(x, .) = int G_a(y, .) U''(y) G(x, y) dy by grid quadrature."""
    G, _, x_used = os_green(pt, profile, grid, x, op=op)
    Ga, _ = green_fast_analytic(pt, profile, grid, normalization=normalization)
    U2 = profile_on_grid(profile, grid, 2)
    integrand = grid.quad_weights * U2 * G.values     # over source y
    return GridFunction(grid, Ga.T @ integrand), x_used


# ---------------------------------------------------------------------------
# spectra


def _equilibrate(A, B, c_scale):
    # row scaling preserves the pencil's eigenvalues and eigenvectors but
    # makes QZ backward errors meaningful row by row
    s = np.max(np.abs(A), axis=1) + c_scale * np.max(np.abs(B), axis=1)
    s = 1.0 / np.maximum(s, 1e-300)
    return s[:, None] * A, s[:, None] * B


def _pencil_rayleigh(alpha, profile, grid):
    n = grid.n
    lap = grid.diff_matrix(2) - alpha**2 * np.eye(n)
    U = profile_on_grid(profile, grid, 0)
    U2 = profile_on_grid(profile, grid, 2)
    A = np.diag(U) @ lap - np.diag(U2)
    B = lap.astype(complex).copy()
    A = A.astype(complex)
    A[0, :] = 0.0
    A[0, 0] = 1.0
    B[0, :] = 0.0
    A[-1, :] = 0.0
    A[-1, -1] = 1.0
    B[-1, :] = 0.0
    return _equilibrate(A, B, max(1.0, abs(profile.u_plus)))


def _pencil_os(alpha, nu, profile, grid):
    op = OSOperator(alpha, nu, profile, grid)
    n = grid.n
    A = op.block_matrix(0.0)
    B = np.zeros_like(A)
    B[n + 1:2 * n - 1, n:] = np.eye(n, dtype=complex)[1:n - 1]
    A, B = _equilibrate(A, B, max(1.0, abs(profile.u_plus)))
    return A, B, op


def _eig_residual(A, B, c, vec):
    # row-equilibrated backward error: rows of (A - cB) scaled to unit size,
    # residual relative to the eigenvector's sup norm
    r = A @ vec - c * (B @ vec)
    row_scale = np.max(np.abs(A), axis=1) + abs(c) * np.max(np.abs(B), axis=1)
    row_scale = np.maximum(row_scale, row_scale.max() * 1e-300 + 1e-300)
    vmax = np.max(np.abs(vec))
    return float(np.max(np.abs(r) / row_scale) / max(vmax, 1e-300))


def rayleigh_spectrum(alpha: int, profile: ShearProfile, grid: HalfLineGrid,
                      imc_min: float = 1e-3, residual_tol: float = 1e-7,
                      refine_factor: float = 1.45) -> list:
    """Unstable Euler phase speeds (Im c > imc_min) at integer alpha >= 1.

    Spurious collocation modes are removed by requiring each candidate to
    reappear at a finer resolution and to carry a small pencil residual
    there.  Returns a list of complex c sorted by decreasing Im c.
    """
    if alpha < 1:
        raise ParameterError("rayleigh_spectrum expects alpha >= 1")
    from .grid import make_grid
    A, B = _pencil_rayleigh(alpha, profile, grid)
    cs, _ = eig(A, B)
    scale_c = max(1.0, abs(profile.u_plus))
    cand = [c for c in cs if np.isfinite(c) and c.imag > imc_min
            and abs(c) < 50 * scale_c]
    if not cand:
        return []
    n2 = int(refine_factor * grid.n)
    g2 = make_grid(grid.scheme, n2, grid.z_max, grid.map_scale)
    A2, B2 = _pencil_rayleigh(alpha, profile, g2)
    cs2, vecs2 = eig(A2, B2)
    out = []
    for c in cand:
        j = int(np.nanargmin(np.abs(cs2 - c)))
        if abs(cs2[j] - c) > 1e-5 * scale_c:
            continue
        if _eig_residual(A2, B2, cs2[j], vecs2[:, j]) > residual_tol:
            continue
        out.append(complex(cs2[j]))
    out.sort(key=lambda c: -c.imag)
    dedup = []
    for c in out:
        if all(abs(c - d) > 1e-8 * scale_c for d in dedup):
            dedup.append(c)
    return dedup


@dataclass
class EigenResult:
    """Maximal-growth mode data for one (alpha, nu)."""

    lam_nu: complex
    lam_0: complex
    phi0: GridFunction
    alpha_star: int
    unstable: bool
    residual: float
    c_nu: complex = field(default=None)
    theta0: GridFunction = field(default=None)   # vorticity block of the eigenvector


def os_spectrum(alpha: int, profile: ShearProfile, nu: float,
                grid: HalfLineGrid, residual_tol: float = 1e-7,
                refine_factor: float = 1.35, track: complex = None) -> EigenResult:
    """Maximal-Re(lambda) converged OS mode at (alpha, nu), paired with the
    Rayleigh eigenvalue lam_0 of the same alpha (0 if Euler-stable).

    `track` optionally selects the converged eigenvalue closest to a given
    phase speed instead of the maximal one (used for continuation sweeps).
    """
    from .grid import make_grid
    if alpha < 1:
        raise ParameterError("os_spectrum expects alpha >= 1")
    A, B, op = _pencil_os(alpha, nu, profile, grid)
    cs, vecs = eig(A, B)
    scale_c = max(1.0, abs(profile.u_plus))
    finite = [(c, vecs[:, j]) for j, c in enumerate(cs)
              if np.isfinite(c) and abs(c) < 50 * scale_c]
    n2 = int(refine_factor * grid.n)
    g2 = make_grid(grid.scheme, n2, grid.z_max, grid.map_scale)
    A2, B2, _ = _pencil_os(alpha, nu, profile, g2)
    cs2, vecs2 = eig(A2, B2)

    def converged(c):
        j = int(np.nanargmin(np.abs(cs2 - c)))
        ok = abs(cs2[j] - c) < 1e-5 * scale_c
        return ok and _eig_residual(A2, B2, cs2[j], vecs2[:, j]) < residual_tol

    good = [(c, v) for c, v in finite if converged(c)]
    if not good:
        raise NearEigenvalueError(
            f"no converged OS eigenvalue at alpha={alpha}, nu={nu}", alpha=alpha)
    if track is not None:
        c_nu, vec = min(good, key=lambda t: abs(t[0] - track))
    else:
        c_nu, vec = max(good, key=lambda t: t[0].imag)
    lam_nu = -1j * alpha * c_nu
    scale = vec[:grid.n][np.argmax(np.abs(vec[:grid.n]))]
    psi = vec[:grid.n] / scale
    theta = vec[grid.n:] / scale
    res = _eig_residual(A, B, c_nu, vec)
    ray = rayleigh_spectrum(alpha, profile, grid)
    lam_0 = -1j * alpha * ray[0] if ray else 0.0
    return EigenResult(
        lam_nu=complex(lam_nu), lam_0=complex(lam_0),
        phi0=GridFunction(grid, psi), alpha_star=int(alpha),
        unstable=bool(lam_nu.real > 0), residual=float(res), c_nu=complex(c_nu),
        theta0=GridFunction(grid, theta))


def find_max_growing(profile: ShearProfile, nu: float, grid: HalfLineGrid,
                     alphas=(1, 2, 3, 4)) -> EigenResult:
    """Scan alpha for the strongest unstable OS mode."""
    best = None
    for a in alphas:
        try:
            r = os_spectrum(a, profile, nu, grid)
        except NearEigenvalueError:
            continue
        if best is None or r.lam_nu.real > best.lam_nu.real:
            best = r
    if best is None:
        raise NearEigenvalueError("no converged OS mode over the alpha scan")
    return best


# ---------------------------------------------------------------------------
# Evans function (compound matrix, grid-free)


_PAIRS = [(0, 1), (0, 2), (0, 3), (1, 2), (1, 3), (2, 3)]


def _wedge_lift(A):
    """Induced action of a 4x4 matrix on the 6-dimensional wedge Lambda^2."""
    B = np.zeros((6, 6), dtype=complex)
    for r, (i, j) in enumerate(_PAIRS):
        for s, (k, l) in enumerate(_PAIRS):
            val = 0.0
            if j == l:
                val += A[i, k]
            if j == k:
                val -= A[i, l]
            if i == l:
                val -= A[j, k]
            if i == k:
                val += A[j, l]
            B[r, s] = val
        # diagonal contributions where both indices move are covered above
    return B


def _wedge_of(u, v):
    return np.array([u[i] * v[j] - u[j] * v[i] for i, j in _PAIRS], dtype=complex)


def evans(alpha: int, c: complex, profile: ShearProfile, nu: float,
          z_max: float = None, n_steps: int = None, return_log: bool = False):
    """Normalized Evans function D(alpha, c).

    Two solutions decaying at infinity (slow ~ e^{-alpha z}, fast
    ~ e^{-int mu_f}) are carried from z_max to the wall as a single wedge
    vector with the combined growth rate alpha + Re mu_f(z) removed
    analytically (the stiffness-control).  D is the (psi, psi') minor at
    z = 0 divided by the closed-form value of the same construction for the
    constant profile U = U+, so D -> 1 as |c| -> infinity along vertical
    lines (the profile's influence vanishes there); zeros are exactly the
    discrete eigenvalues.
    """
    if alpha == 0:
        raise UnsupportedModeError("alpha = 0 is excluded")
    if z_max is None:
        z_max = 12.0 / profile.eta0 + 6.0 / abs(alpha)
    out = _evans_log(alpha, c, profile, nu, z_max, n_steps) \
        - _evans_log_free(alpha, c, profile, nu, z_max)
    if return_log:
        return out
    if out.real > 500:
        return np.inf
    return complex(np.exp(out))


def _evans_log_free(alpha, c, profile, nu, z_max):
    """Closed-form log of the raw Evans construction for U = U+ constant."""
    eps = np.sqrt(nu) / (1j * alpha)
    a = abs(alpha)
    mu_inf = complex(np.sqrt(alpha**2 + (profile.u_plus - c) / eps))
    if mu_inf.real < 0:
        mu_inf = -mu_inf
    y_slow = np.array([1, -a, a**2, -a**3], dtype=complex)
    y_fast = np.array([1, -mu_inf, mu_inf**2, -mu_inf**3], dtype=complex)
    w0 = np.linalg.norm(_wedge_of(y_slow, y_fast))
    return np.log((a - mu_inf) / w0) + (a + mu_inf) * z_max


def _evans_log(alpha, c, profile, nu, z_max, n_steps):
    eps = np.sqrt(nu) / (1j * alpha)
    a = abs(alpha)

    u_plus = profile.u_plus
    mu_inf = complex(np.sqrt(alpha**2 + (u_plus - c) / eps))
    if mu_inf.real < 0:
        mu_inf = -mu_inf
    if abs(mu_inf - a) < 1e-8 * max(1.0, abs(mu_inf)):
        raise SplittingError(
            f"fast and slow rates coincide at c={c:.6g}; cannot split")

    y_slow = np.array([1, -a, a**2, -a**3], dtype=complex)
    y_fast = np.array([1, -mu_inf, mu_inf**2, -mu_inf**3], dtype=complex)
    W = _wedge_of(y_slow, y_fast)
    W /= np.linalg.norm(W)

    def mu_re(zz):
        r = np.sqrt(alpha**2 + (eval_profile(profile, 0, zz) - c) / eps)
        return np.real(np.where(np.real(r) < 0, -r, r))

    if n_steps is None:
        rate = a + float(np.max(mu_re(np.linspace(0.0, z_max, 64))))
        n_steps = int(max(1500, 24 * z_max * rate))
    h = z_max / n_steps
    z_nodes = np.maximum(z_max - h * np.arange(n_steps + 1), 0.0)
    z_mids = np.maximum(z_nodes[:-1] - h / 2.0, 0.0)

    def coeffs(zz):
        U = eval_profile(profile, 0, zz)
        U2 = eval_profile(profile, 2, zz)
        a30 = -a**4 - (alpha**2 * (U - c) + U2) / eps
        a32 = 2 * alpha**2 + (U - c) / eps
        return a30, a32, a + mu_re(zz)

    a30_n, a32_n, r_n = coeffs(z_nodes)
    a30_m, a32_m, r_m = coeffs(z_mids)
    # growth removed analytically: W = Y exp(+int_z^{zmax} r), Simpson for int r
    r_integral = float(np.sum((h / 6.0) * (r_n[:-1] + 4.0 * r_m + r_n[1:])))

    def apply_rhs(a30, a32, r, w):
        A = np.zeros((4, 4), dtype=complex)
        A[0, 1] = A[1, 2] = A[2, 3] = 1.0
        A[3, 0] = a30
        A[3, 2] = a32
        return _wedge_lift(A) @ w + r * w

    log_scale = 0.0 + 0.0j
    for i in range(n_steps):
        k1 = apply_rhs(a30_n[i], a32_n[i], r_n[i], W)
        k2 = apply_rhs(a30_m[i], a32_m[i], r_m[i], W - (h / 2) * k1)
        k3 = apply_rhs(a30_m[i], a32_m[i], r_m[i], W - (h / 2) * k2)
        k4 = apply_rhs(a30_n[i + 1], a32_n[i + 1], r_n[i + 1], W - h * k3)
        W = W - (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        mag = np.linalg.norm(W)
        if mag > 1e6 or mag < 1e-6:
            if mag == 0 or not np.isfinite(mag):
                raise SplittingError("compound vector collapsed during integration")
            log_scale += np.log(mag)
            W = W / mag
    d = W[0]   # (psi, psi') minor at the wall
    if d == 0:
        return -np.inf + 0j
    return np.log(d) + log_scale + r_integral


def evans_winding(alpha: int, c_center: complex, radius: float,
                  profile: ShearProfile, nu: float, n_points: int = 48,
                  **kw) -> int:
    """Winding number of D around a circle in the c plane (argument principle)."""
    thetas = 2 * np.pi * np.arange(n_points) / n_points
    logs = []
    c_ref = c_center.real + 1j * 6.0 * max(1.0, abs(c_center) + radius,
                                           1.0 + profile.sup_abs())
    for t in thetas:
        c = c_center + radius * np.exp(1j * t)
        logs.append(_evans_log(alpha, c, profile, nu,
                               kw.get("z_max") or 12.0 / profile.eta0 + 6.0 / abs(alpha),
                               kw.get("n_steps")))
    args = np.angle(np.exp(1j * np.imag(np.array(logs))))
    total = 0.0
    for i in range(n_points):
        d = args[(i + 1) % n_points] - args[i]
        while d > np.pi:
            d -= 2 * np.pi
        while d < -np.pi:
            d += 2 * np.pi
        total += d
    return int(np.rint(total / (2 * np.pi)))
