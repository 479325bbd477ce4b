"""Approximate-solution cascade seeded by the maximal growing mode.

The perturbation ansatz is nu^p sum_j nu^{j/2} omega_j with omega_0 the
unstable eigenmode, higher correctors solving

    (d_t - L) omega_j = R_j,   omega_j(0) = 0,
    R_j = S omega_{j-1} + sum_{k + l + 2p = j} Q(omega_k, omega_l),

where S is the slow-time profile-drift operator and Q the quadratic
transport.  Correctors are evaluated by contour Duhamel integrals on a
shared Chebyshev time grid so each level can be sampled at the next
level's quadrature nodes by barycentric interpolation in time.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .elliptic import quadratic_transport, velocity_from_vorticity
from .errors import CascadeDivergenceError, NoGrowingModeError, ParameterError
from .grid import GridFunction, HalfLineGrid
from .modes import ModeFamily
from .norms import BLNormParams, ModeWeights, sobolev_bl_norm
from .orr_sommerfeld import EigenResult, OSOperator, find_max_growing
from .profiles import ShearProfile, heat_evolve, profile_on_grid
from .semigroup import SemigroupConfig, duhamel_integral


@dataclass
class CascadeParams:
    p: int
    big_m: int                      # cascade depth M
    s: int                          # Sobolev-layer order of the norms
    delta_exp: float
    t_samples: np.ndarray = None    # norm evaluation times; default set from T_nu
    n_time_nodes: int = 21          # Chebyshev interpolation nodes in time
    horizon_mode: str = "nu_delta"  # or "order_one"
    amplitude_window: float = 0.1   # bracket fit restricted to nu^p e^{l0 t} <= this

    def __post_init__(self):
        if self.p < 1:
            raise ParameterError("amplitude exponent p must be >= 1")
        if self.big_m < 0:
            raise ParameterError("cascade depth M must be >= 0")
        if not (0 < self.delta_exp < self.p):
            raise ParameterError("need 0 < delta_exp < p")

    def horizon(self, nu: float, re_lam0: float) -> float:
        """T_nu solving nu^p e^{re_lam0 T} = nu^delta (or = 1)."""
        if re_lam0 <= 0:
            raise NoGrowingModeError("horizon needs an unstable Euler mode")
        target = self.p - self.delta_exp if self.horizon_mode == "nu_delta" \
            else float(self.p)
        return target * np.log(1.0 / nu) / re_lam0


@dataclass
class GrowingMode:
    eig: EigenResult
    grid: HalfLineGrid
    theta0: np.ndarray              # Lap_alpha phi0, normalized
    alpha_star: int

    def family(self, t: float) -> ModeFamily:
        v = np.exp(self.eig.lam_nu * t) * self.theta0
        return ModeFamily(self.grid, {self.alpha_star: v,
                                      -self.alpha_star: np.conj(v)})

    def mode_plus(self, t: float) -> np.ndarray:
        return np.exp(self.eig.lam_nu * t) * self.theta0


def growing_mode(profile: ShearProfile, nu: float, grid: HalfLineGrid,
                 alphas=(1, 2, 3), n_x: int = 32) -> GrowingMode:
    """Maximal growing mode omega_0, scaled so the physical velocity
    perturbation has unit sup norm at t = 0."""
    eig = find_max_growing(profile, nu, grid, alphas=alphas)
    if not eig.unstable:
        raise NoGrowingModeError(
            f"profile is spectrally stable at nu={nu} over alphas {alphas}")
    a = eig.alpha_star
    # the eigenvector's own vorticity block: consistent with the discrete
    # resolvent, free of high-derivative roundoff at the wall
    theta0 = eig.theta0.values
    fam = ModeFamily(grid, {a: theta0, -a: np.conj(theta0)})
    _, v1, v2 = velocity_from_vorticity(fam)
    sup_u = max(np.max(np.abs(v1.to_physical(n_x).real)),
                np.max(np.abs(v2.to_physical(n_x).real)))
    if sup_u == 0:
        raise NoGrowingModeError("degenerate eigenfunction")
    return GrowingMode(eig, grid, theta0 / sup_u, a)


class _HeatCache:
    def __init__(self, profile, grid):
        self.profile = profile
        self.grid = grid
        self._store = {}

    def at(self, tau: float):
        key = round(float(tau), 12)
        hit = self._store.get(key)
        if hit is None:
            hit = heat_evolve(self.profile, tau, self.grid)
            if len(self._store) < 4096:
                self._store[key] = hit
        return hit


def perturbation_S(omega: ModeFamily, t: float, nu: float,
                   profile: ShearProfile, heat_cache: _HeatCache = None) -> ModeFamily:
    """Profile-drift operator
    S w = nu^{-1/2} (U_s - U) d_x w + nu^{-1/2} u2 (d_zz U_s - U'')
    evaluated at slow time tau = sqrt(nu) t, mode by mode."""
    grid = omega.grid
    heat_cache = heat_cache or _HeatCache(profile, grid)
    hot = heat_cache.at(np.sqrt(nu) * t)
    dU = hot.values.values.real - profile_on_grid(profile, grid, 0)
    dU2 = hot.dzz_values.values.real - profile_on_grid(profile, grid, 2)
    _, _, v2 = velocity_from_vorticity(omega)
    fac = nu ** (-0.5)
    out = {}
    for a in omega.alphas:
        if a == 0:
            continue
        out[a] = fac * (dU * (1j * a) * omega.modes[a]
                        + v2.modes[a] * dU2)
    return ModeFamily(grid, out)


def _cheb_time_nodes(t_max, n):
    x = -np.cos(np.pi * np.arange(n) / (n - 1))
    return 0.5 * t_max * (x + 1.0)


def _bary_time_weights(nodes):
    n = len(nodes)
    w = np.ones(n)
    w[0] = w[-1] = 0.5
    w *= (-1.0) ** np.arange(n)
    return w


def _interp_time(nodes, bary_w, values, t):
    """Barycentric interpolation of values (n_nodes, ...) at scalar t."""
    d = t - nodes
    hit = np.where(np.abs(d) < 1e-14 * max(1.0, nodes[-1]))[0]
    if len(hit):
        return values[hit[0]]
    r = bary_w / d
    return np.tensordot(r, values, axes=(0, 0)) / r.sum()


@dataclass
class CascadeState:
    params: CascadeParams
    nu: float
    grid: HalfLineGrid
    mode: GrowingMode
    profile: ShearProfile
    t_nodes: np.ndarray
    fields: dict                      # j -> {alpha > 0 -> (n_t, n) values}
    t_samples: np.ndarray
    norms_j: dict = field(default_factory=dict)       # j -> array over t_samples
    lam_nu: complex = 0.0
    lam_0: complex = 0.0
    alpha_star: int = 1
    prm: BLNormParams = None
    weights: ModeWeights = None

    def family_at(self, j: int, t: float) -> ModeFamily:
        """omega_j(t) as a conjugate-symmetric mode family."""
        if j == 0:
            return self.mode.family(t)
        bw = _bary_time_weights(self.t_nodes)
        out = {}
        for a, mat in self.fields[j].items():
            v = _interp_time(self.t_nodes, bw, mat, t)
            out[a] = v
            out[-a] = np.conj(v)
        return ModeFamily(self.grid, out)


def build_cascade(cp: CascadeParams, profile: ShearProfile, nu: float,
                  grid: HalfLineGrid, prm: BLNormParams = None,
                  weights: ModeWeights = None, alphas=(1, 2, 3),
                  cfg: SemigroupConfig = None, s_depth: int = 5,
                  n_s_gauss: int = 12, progress=None) -> CascadeState:
    """Solve the corrector hierarchy on a shared Chebyshev time grid."""
    gm = growing_mode(profile, nu, grid, alphas=alphas)
    a_star = gm.alpha_star
    re_l0 = gm.eig.lam_0.real
    if re_l0 <= 0:
        raise NoGrowingModeError("Euler-stable profile cannot seed the cascade")
    t_max = cp.horizon(nu, re_l0)
    t_nodes = _cheb_time_nodes(t_max, cp.n_time_nodes)
    bw = _bary_time_weights(t_nodes)
    if cp.t_samples is None:
        t_samples = np.linspace(t_max / 8.0, t_max, 8)
    else:
        t_samples = np.asarray(cp.t_samples, dtype=float)
    if prm is None:
        prm = BLNormParams(beta=0.25, gamma=1.0, big_p=2.0, p=1, nu=nu)
    if weights is None:
        amax = max(1, (cp.big_m // (2 * cp.p) + 1)) * a_star
        weights = ModeWeights.uniform(range(-amax, amax + 1))

    heat_cache = _HeatCache(profile, grid)
    cfg = cfg or SemigroupConfig()
    cfg.lam0 = gm.eig.lam_nu
    cfg.tau = 0.1 * max(gm.eig.lam_nu.real, 1.0)

    state = CascadeState(cp, nu, grid, gm, profile, t_nodes, {}, t_samples,
                         lam_nu=gm.eig.lam_nu, lam_0=gm.eig.lam_0,
                         alpha_star=a_star, prm=prm, weights=weights)
    ops = {}

    def op_for(a):
        if a not in ops:
            ops[a] = OSOperator(a, nu, profile, grid)
        return ops[a]

    def rhs_family(j, sigma):
        """R_j(sigma) as a mode family (positive modes only)."""
        fam_prev = state.family_at(j - 1, sigma)
        r = perturbation_S(fam_prev, sigma, nu, profile, heat_cache)
        total = {a: v for a, v in r.modes.items()}
        for k in range(0, j - 2 * cp.p + 1):
            l = j - 2 * cp.p - k
            if l < 0:
                continue
            fk = state.family_at(k, sigma)
            fl = state.family_at(l, sigma)
            q, _ = quadratic_transport(fk, fl, prm, weights, cp.s,
                                       return_ratio=False)
            for a, v in q.modes.items():
                total[a] = total.get(a, 0.0) + v
        return ModeFamily(grid, total)

    for j in range(1, cp.big_m + 1):
        per_mode = {}
        probe = rhs_family(j, max(t_nodes[1], 1e-6))
        pos_modes = sorted(a for a in probe.alphas if a > 0)
        for a in pos_modes:
            mat = np.zeros((len(t_nodes), grid.n), dtype=complex)
            op = op_for(a)
            for i, t_i in enumerate(t_nodes):
                if t_i == 0.0:
                    continue        # omega_j(0) = 0
                def rhs_at(sig, _a=a, _j=j):
                    fam = rhs_family(_j, sig)
                    return fam.modes.get(_a, np.zeros(grid.n, dtype=complex))
                mat[i] = duhamel_integral(op, rhs_at, t_i, nu, profile,
                                          cfg=cfg, s_depth=s_depth,
                                          n_s_gauss=n_s_gauss)
                if not np.all(np.isfinite(mat[i])):
                    raise CascadeDivergenceError(
                        f"corrector {j} diverged at t={t_i}", j=j)
            per_mode[a] = mat
            if progress:
                progress(f"omega_{j}, mode {a} done")
        state.fields[j] = per_mode

    # norm curves ||omega_j(t)||_{H^{s+M+1-j}}
    for j in range(0, cp.big_m + 1):
        order = cp.s + cp.big_m + 1 - j
        vals = []
        for t in t_samples:
            fam = state.family_at(j, t)
            vals.append(sobolev_bl_norm(fam, order, prm, weights))
        state.norms_j[j] = np.asarray(vals)
        if not np.all(np.isfinite(state.norms_j[j])):
            raise CascadeDivergenceError(f"norm of omega_{j} infinite", j=j)
    return state


def envelope_fit(state: CascadeState) -> dict:
    """Fitted constants of the corrector growth envelopes
    ||omega_j(t)|| <= C_j e^{(1 + j/2p) Re lam0 t}."""
    cp = state.params
    out = {}
    re_l0 = state.lam_0.real
    for j, vals in state.norms_j.items():
        env = np.exp((1.0 + j / (2.0 * cp.p)) * re_l0 * state.t_samples)
        out[j] = float(np.max(vals / env))
    return out


def remainder_error(state: CascadeState, cp: CascadeParams, nu: float) -> dict:
    """Remainder norms and the fitted exponent against nu^p e^{Re lam0 t}.

    R_app = nu^{p+(M+1)/2} S omega_M
            + sum_{k+l > M+1-2p, 1 <= k,l <= M} nu^{2p+(k+l)/2} Q(omega_k, omega_l)
    """
    grid = state.grid
    prm, weights = state.prm, state.weights
    profile = state.profile
    heat_cache = _HeatCache(profile, grid)
    norms = []
    for t in state.t_samples:
        fam_m = state.family_at(cp.big_m, t)
        r = perturbation_S(fam_m, t, nu, profile, heat_cache) \
            .scaled(nu ** (cp.p + (cp.big_m + 1) / 2.0))
        total = {a: v for a, v in r.modes.items()}
        for k in range(1, cp.big_m + 1):
            for l in range(1, cp.big_m + 1):
                if k + l <= cp.big_m + 1 - 2 * cp.p:
                    continue
                q, _ = quadratic_transport(state.family_at(k, t),
                                           state.family_at(l, t),
                                           prm, weights, cp.s,
                                           return_ratio=False)
                fac = nu ** (2 * cp.p + (k + l) / 2.0)
                for a, v in q.modes.items():
                    total[a] = total.get(a, 0.0) + fac * v
        norms.append(sobolev_bl_norm(ModeFamily(grid, total), cp.s, prm, weights))
    norms = np.asarray(norms)

    re_l0 = state.lam_0.real
    x = cp.p * np.log(nu) + re_l0 * state.t_samples      # ln(nu^p e^{l0 t})
    t_max = state.t_samples[-1]
    win = state.t_samples >= 0.5 * t_max
    slope = float(np.polyfit(x[win], np.log(norms[win]), 1)[0])
    target = 1.0 + (cp.big_m + 1) / (2.0 * cp.p)
    return {"remainder_norms": norms, "fitted_exponent": slope,
            "target_exponent": target,
            "within_10pct": bool(abs(slope - target) <= 0.1 * target)}


def horizon_and_amplitude(state: CascadeState, cp: CascadeParams, nu: float,
                          n_x: int = 48) -> dict:
    """Horizon, sup-norm amplitude curve, and the growth bracket.

    The amplitude is the physical sup norm of the reconstructed velocity
    perturbation nu^p sum_j nu^{j/2} u_j; theta_1, theta_2 bracket its ratio
    to nu^p e^{Re lam0 t} over the window where that quantity is small.
    """
    re_l0 = state.lam_0.real
    t_nu = cp.horizon(nu, re_l0)
    t_curve = np.concatenate([[0.0], state.t_samples])
    amps = []
    for t in t_curve:
        u1_tot = np.zeros((n_x, state.grid.n))
        u2_tot = np.zeros((n_x, state.grid.n))
        for j in range(0, cp.big_m + 1):
            fam = state.family_at(j, t)
            _, v1, v2 = velocity_from_vorticity(fam)
            scale = nu ** (cp.p + j / 2.0)
            u1_tot += scale * v1.to_physical(n_x).real
            u2_tot += scale * v2.to_physical(n_x).real
        amps.append(float(max(np.max(np.abs(u1_tot)), np.max(np.abs(u2_tot)))))
    amps = np.asarray(amps)

    x = nu ** cp.p * np.exp(re_l0 * t_curve)
    window = x <= cp.amplitude_window
    ratios = amps[window] / x[window]
    theta1 = float(np.min(ratios)) if len(ratios) else 0.0
    theta2 = float(np.max(ratios)) if len(ratios) else np.inf
    amplification = amps[-1] / amps[0] if amps[0] > 0 else np.inf
    target_amp = nu ** (cp.delta_exp - cp.p) if cp.horizon_mode == "nu_delta" \
        else nu ** (-float(cp.p))
    return {
        "t_nu": float(t_nu),
        "t_curve": t_curve,
        "amplitude": amps,
        "theta1": theta1,
        "theta2": theta2,
        "bracket_ok": bool(theta1 > 0 and np.isfinite(theta2)),
        "amplification": float(amplification),
        "target_amplification": float(target_amp),
        "amplification_ratio": float(amplification / target_amp),
    }
