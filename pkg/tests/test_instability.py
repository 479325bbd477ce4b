import numpy as np
import pytest

from blsg.errors import NoGrowingModeError, ParameterError
from blsg.grid import make_grid
from blsg.instability import (CascadeParams, _HeatCache, build_cascade,
                              envelope_fit, growing_mode,
                              horizon_and_amplitude, perturbation_S,
                              remainder_error)
from blsg.norms import BLNormParams
from blsg.profiles import jet_profile, synthetic_profile


@pytest.fixture(scope="module")
def casc_grid():
    return make_grid("chebyshev_mapped", 128, 20.0, 1.0)


@pytest.fixture(scope="module")
def strong_jet():
    return jet_profile(50.0, 3.0, 2.0)


@pytest.fixture(scope="module")
def gm(casc_grid, strong_jet):
    return growing_mode(strong_jet, 1e-2, casc_grid, alphas=(1,))


@pytest.fixture(scope="module")
def small_cascade(casc_grid, strong_jet):
    cp = CascadeParams(p=2, big_m=1, s=1, delta_exp=1.2, n_time_nodes=9)
    prm = BLNormParams(beta=0.25, nu=1e-2, p=1)
    return cp, build_cascade(cp, strong_jet, 1e-2, casc_grid, prm=prm,
                             alphas=(1,), s_depth=6, n_s_gauss=10)


def test_horizon_closed_form():
    cp = CascadeParams(p=2, big_m=0, s=1, delta_exp=1.0)
    assert cp.horizon(1e-2, 1.0) == pytest.approx(np.log(100.0))
    cp2 = CascadeParams(p=2, big_m=0, s=1, delta_exp=1.0, horizon_mode="order_one")
    assert cp2.horizon(1e-2, 1.0) == pytest.approx(2 * np.log(100.0))
    with pytest.raises(ParameterError):
        CascadeParams(p=2, big_m=0, s=1, delta_exp=2.5)


def test_growing_mode_reality_and_normalization(gm, casc_grid):
    fam = gm.family(0.3)
    phys = fam.to_physical(16)
    assert np.max(np.abs(phys.imag)) < 1e-10 * np.max(np.abs(phys.real))
    # normalization: unit physical velocity sup at t = 0
    from blsg.elliptic import velocity_from_vorticity
    _, v1, v2 = velocity_from_vorticity(gm.family(0.0))
    sup_u = max(np.max(np.abs(v1.to_physical(32).real)),
                np.max(np.abs(v2.to_physical(32).real)))
    assert sup_u == pytest.approx(1.0, rel=1e-10)


def test_growing_mode_requires_instability(casc_grid):
    from blsg.profiles import tanh_profile
    with pytest.raises(NoGrowingModeError):
        growing_mode(tanh_profile(1.0, 1.0), 1e-2, casc_grid, alphas=(1,))


def test_growth_bracket(gm):
    # c0 e^{Re lam0 t} <= ||omega_0(t)|| <= C0 e^{Re lam0 t} while
    # sqrt(nu) t stays bounded; single-mode norms scale exactly like
    # e^{Re lam_nu t}, so the bracket constants are e^{(lam_nu - lam0) t}
    ts = np.linspace(0.0, 1.0, 8)
    ratios = np.exp((gm.eig.lam_nu.real - gm.eig.lam_0.real) * ts)
    assert np.all(np.isfinite(ratios)) and ratios.min() > 0.05
    assert ratios.max() <= 1.0 + 1e-12


def test_eigenmode_semigroup_consistency(gm, casc_grid, strong_jet):
    # e^{L t} omega_0(0) tracks e^{lam_nu t} within 2 percent
    from blsg.grid import GridFunction
    from blsg.semigroup import SemigroupConfig, apply_semigroup_contour
    t = 0.15
    cfg = SemigroupConfig(lam0=gm.eig.lam_nu, tau=0.5)
    out = apply_semigroup_contour(GridFunction(casc_grid, gm.theta0), 1, t,
                                  1e-2, strong_jet, cfg=cfg)
    expected = np.exp(gm.eig.lam_nu * t) * gm.theta0
    assert np.max(np.abs(out.values - expected)) < 0.02 * np.max(np.abs(expected))


class _FrozenCache(_HeatCache):
    """Synthetic frozen heat flow: U_s(tau) = U for every tau."""

    def at(self, tau):
        return super().at(0.0)


def test_perturbation_vanishes_at_t0(gm, casc_grid, strong_jet):
    hc = _HeatCache(strong_jet, casc_grid)
    out = perturbation_S(gm.family(0.0), 0.0, 1e-2, strong_jet, hc)
    assert all(np.max(np.abs(v)) < 1e-12 for v in out.modes.values())


def test_perturbation_zero_when_frozen():
    # frozen profile drift (U_s identically U): both differences vanish
    g = make_grid("chebyshev_mapped", 64, 20.0, 2.0)
    from blsg.profiles import tanh_profile
    from blsg.modes import ModeFamily
    prof = tanh_profile(1.0, 1.0)
    fam = ModeFamily(g, {1: np.exp(-g.nodes), -1: np.exp(-g.nodes)})
    out = perturbation_S(fam, 0.7, 1e-2, prof, _FrozenCache(prof, g))
    scale = np.max(np.abs(fam.modes[1]))
    assert all(np.max(np.abs(v)) < 1e-12 * scale for v in out.modes.values())


def test_perturbation_linear_in_time(casc_grid):
    # ||S w||_{H^s} <= C t ||w||_{H^{s+1}} with C stable in t, measured in
    # the regime where the heat drift is genuinely linear in tau
    from blsg.modes import ModeFamily
    from blsg.norms import ModeWeights, sobolev_bl_norm
    mild = jet_profile(1.0, 1.0, 0.0)
    prm = BLNormParams(beta=0.25, nu=1e-2, p=1)
    w = ModeWeights.uniform([-1, 1])
    hc = _HeatCache(mild, casc_grid)
    vals = casc_grid.nodes * np.exp(-casc_grid.nodes)
    fam = ModeFamily(casc_grid, {1: vals, -1: vals})
    n_in = sobolev_bl_norm(fam, 2, prm, w)
    cs = []
    for t in (0.1, 0.5, 1.0):
        out = perturbation_S(fam, t, 1e-2, mild, hc)
        cs.append(sobolev_bl_norm(out, 1, prm, w) / (t * n_in))
    cs = np.array(cs)
    assert np.all(np.isfinite(cs))
    assert cs.max() / cs.min() < 2.0


def test_cascade_state(small_cascade):
    cp, state = small_cascade
    # omega_j(0) = 0 exactly for j >= 1 (time node at t = 0 untouched)
    assert np.max(np.abs(state.fields[1][1][0])) == 0.0
    assert all(np.all(np.isfinite(v)) for v in state.norms_j.values())
    fits = envelope_fit(state)
    assert all(np.isfinite(c) and c > 0 for c in fits.values())


def test_cascade_duhamel_self_consistency(small_cascade, casc_grid, strong_jet):
    # d omega_1/dt = L omega_1 + R_1 within 1e-2 (weighted relative),
    # differentiating the time interpolant at mid-horizon
    cp, state = small_cascade
    from blsg.instability import perturbation_S as pS
    from blsg.orr_sommerfeld import OSOperator
    from blsg.semigroup import apply_generator
    from blsg.grid import GridFunction
    from blsg.norms import norm_1d
    t_mid = 0.55 * state.t_nodes[-1]
    h = 0.01 * state.t_nodes[-1]
    w_p = state.family_at(1, t_mid + h).modes[1]
    w_m = state.family_at(1, t_mid - h).modes[1]
    dwdt = (w_p - w_m) / (2 * h)
    op = OSOperator(1, state.nu, strong_jet, casc_grid)
    hc = _HeatCache(strong_jet, casc_grid)
    rhs = apply_generator(op, state.family_at(1, t_mid).modes[1]) \
        + pS(state.family_at(0, t_mid), t_mid, state.nu, strong_jet, hc).modes[1]
    # compare in the bulk: the boundary rows of the discrete generator are
    # closure rows, not the PDE
    bulk = (casc_grid.nodes > 0.5) & (casc_grid.nodes < 0.7 * casc_grid.z_max)
    num = np.max(np.abs((dwdt - rhs)[bulk]))
    den = np.max(np.abs(rhs[bulk]))
    assert num < 1e-2 * den


def test_remainder_m0_structure(casc_grid, strong_jet):
    # M = 0: remainder is nu^{p + 1/2} S omega_0 only (no quadratic terms)
    cp = CascadeParams(p=2, big_m=0, s=1, delta_exp=1.2, n_time_nodes=7)
    prm = BLNormParams(beta=0.25, nu=1e-2, p=1)
    state = build_cascade(cp, strong_jet, 1e-2, casc_grid, prm=prm, alphas=(1,))
    rem = remainder_error(state, cp, 1e-2)
    from blsg.norms import ModeWeights, sobolev_bl_norm
    hc = _HeatCache(strong_jet, casc_grid)
    t0 = state.t_samples[3]
    direct = perturbation_S(state.family_at(0, t0), t0, 1e-2, strong_jet, hc) \
        .scaled(1e-2 ** 2.5)
    w = state.weights
    got = rem["remainder_norms"][3]
    expect = sobolev_bl_norm(direct, cp.s, prm,
                             ModeWeights.uniform([-1, 1]))
    assert got == pytest.approx(expect, rel=1e-8)


def test_amplitude_and_horizon(small_cascade):
    cp, state = small_cascade
    amp = horizon_and_amplitude(state, cp, state.nu)
    t_closed = (cp.p - cp.delta_exp) * np.log(1 / state.nu) / state.lam_0.real
    assert amp["t_nu"] == pytest.approx(t_closed, rel=1e-14)
    # amplitude at t = 0 equals nu^p by the unit normalization (up to the
    # x-sampling of the sup)
    assert amp["amplitude"][0] == pytest.approx(state.nu ** cp.p, rel=2e-2)
    assert amp["theta1"] > 0 and np.isfinite(amp["theta2"])
