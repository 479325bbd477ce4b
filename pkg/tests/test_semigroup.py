import numpy as np
import pytest

from blsg.grid import GridFunction, differentiate, grid_function, make_grid
from blsg.norms import BLNormParams, norm_1d
from blsg.orr_sommerfeld import OSOperator, os_spectrum
from blsg.semigroup import (SemigroupConfig, apply_generator,
                            apply_semigroup_contour, apply_semigroup_oracle,
                            duhamel_derivative, measure_semigroup_bounds,
                            split_sa_ra)


@pytest.fixture(scope="module")
def sg_grid():
    return make_grid("chebyshev_mapped", 160, 30.0, 2.0)


def _compatible_bump(grid, op, alpha=1):
    """Gaussian bump with the wall moments of omega and L omega removed, so
    no vortex sheet is shed at t = 0+."""
    wgt = np.exp(-alpha * grid.nodes)
    shapes = [np.exp(-2 * grid.nodes), grid.nodes * np.exp(-1.5 * grid.nodes)]

    def moments(v):
        lv = apply_generator(op, v.astype(complex))
        return np.array([np.dot(grid.quad_weights, wgt * v),
                         np.dot(grid.quad_weights, wgt * lv)])

    raw = np.exp(-((grid.nodes - 2.5) / 0.8) ** 2).astype(complex)
    m = np.column_stack([moments(s) for s in shapes])
    coef = np.linalg.solve(m, moments(raw))
    return GridFunction(grid, raw - coef[0] * shapes[0] - coef[1] * shapes[1])


def test_identity_at_small_time(sg_grid, tanh_prof):
    op = OSOperator(1, 1e-4, tanh_prof, sg_grid)
    om = _compatible_bump(sg_grid, op)
    out = apply_semigroup_contour(om, 1, 1e-3, 1e-4, tanh_prof, op=op)
    rel = np.max(np.abs(out.values - om.values)) / np.max(np.abs(om.values))
    assert rel <= 1e-3


def test_semigroup_composition(sg_grid, tanh_prof):
    op = OSOperator(1, 1e-2, tanh_prof, sg_grid)
    om = grid_function(sg_grid, lambda z: np.exp(-((z - 2.5) / 0.8) ** 2))
    two_step = apply_semigroup_contour(
        apply_semigroup_contour(om, 1, 0.3, 1e-2, tanh_prof, op=op),
        1, 0.7, 1e-2, tanh_prof, op=op)
    one_step = apply_semigroup_contour(om, 1, 1.0, 1e-2, tanh_prof, op=op)
    rel = np.max(np.abs(two_step.values - one_step.values)) \
        / np.max(np.abs(one_step.values))
    assert rel < 1e-4


def test_negative_mode_conjugation(sg_grid, tanh_prof):
    om = grid_function(sg_grid, lambda z: np.exp(-((z - 2.0) / 0.7) ** 2) * (1 + 0.4j))
    plus = apply_semigroup_contour(om, 1, 0.4, 1e-2, tanh_prof)
    conj_in = GridFunction(sg_grid, np.conj(om.values))
    minus = apply_semigroup_contour(conj_in, -1, 0.4, 1e-2, tanh_prof)
    assert np.max(np.abs(minus.values - np.conj(plus.values))) < 1e-12 * \
        np.max(np.abs(plus.values))


def test_oracle_linearity(sg_grid, tanh_prof):
    f1 = lambda z: np.exp(-((z - 2.0) / 0.5) ** 2)
    f2 = lambda z: np.cos(z) * np.exp(-z)
    f3 = lambda z: 2 * f1(z) + 0.5j * f2(z)
    outs = []
    for fn in (f1, f2, f3):
        _, snaps = apply_semigroup_oracle(fn, 1, [0.5], 1e-2, tanh_prof,
                                          z_max=25.0, n=2001)
        outs.append(snaps[0.5])
    lin = np.max(np.abs(2 * outs[0] + 0.5j * outs[1] - outs[2]))
    assert lin < 1e-10 * np.max(np.abs(outs[2]))


def test_oracle_scalar_shift(sg_grid, tanh_prof):
    # evolving L + sigma I equals e^{sigma t} times the L evolution, exactly
    sigma, t = 1.0, 0.5
    fn = lambda z: np.exp(-((z - 2.0) / 0.6) ** 2)
    _, s1 = apply_semigroup_oracle(fn, 1, [t], 1e-2, tanh_prof, z_max=25.0, n=2001)
    _, s2 = apply_semigroup_oracle(fn, 1, [t], 1e-2, tanh_prof, z_max=25.0,
                                   n=2001, sigma_shift=sigma)
    assert np.max(np.abs(s2[t] - np.exp(sigma * t) * s1[t])) \
        < 1e-9 * np.max(np.abs(np.exp(sigma * t) * s1[t]))


def test_contour_vs_oracle(sg_grid, tanh_prof):
    alpha, nu = 2, 1e-2
    op = OSOperator(alpha, nu, tanh_prof, sg_grid)
    fdata = lambda z: np.exp(-((z - 2.5) / 0.8) ** 2) * (1 + 0.3j)
    om = grid_function(sg_grid, fdata)
    zo, snaps = apply_semigroup_oracle(fdata, alpha, [0.5], nu, tanh_prof,
                                       z_max=30.0, n=6001)
    th = apply_semigroup_contour(om, alpha, 0.5, nu, tanh_prof, op=op)
    oi = np.interp(sg_grid.nodes, zo, snaps[0.5].real) \
        + 1j * np.interp(sg_grid.nodes, zo, snaps[0.5].imag)
    assert np.max(np.abs(th.values - oi)) < 1e-3 * np.max(np.abs(oi))


def test_oracle_eigenfunction_growth(jet_prof):
    g = make_grid("chebyshev_mapped", 200, 24.0, 1.2)
    r = os_spectrum(1, jet_prof, 1e-4, g)
    theta0 = OSOperator(1, 1e-4, jet_prof, g).lap @ r.phi0.values
    t = 0.5
    fn = lambda z: g.interpolate(theta0, z)
    zo, snaps = apply_semigroup_oracle(fn, 1, [t], 1e-4, jet_prof,
                                       z_max=24.0, n=8001)
    expected = np.exp(r.lam_nu * t) * fn(zo)
    num = np.max(np.abs(snaps[t] - expected))
    assert num < 0.02 * np.max(np.abs(expected))


def test_split_constant_profile(const_prof):
    # U'' = 0 and data detached from the wall: R_alpha vanishes and S_alpha
    # is the exact whole-line fast evolution
    g = make_grid("chebyshev_mapped", 224, 40.0, 8.0)
    alpha, nu, t = 1, 1e-2, 0.4
    op = OSOperator(alpha, nu, const_prof, g)
    om = grid_function(g, lambda z: np.exp(-((z - 16.0) / 1.5) ** 2))
    cfg = SemigroupConfig(tau=0.25)
    S, R = split_sa_ra(om, alpha, t, nu, const_prof, op=op, cfg=cfg)
    full = apply_semigroup_contour(om, alpha, t, nu, const_prof, op=op, cfg=cfg)
    assert np.max(np.abs(S.values + R.values - full.values)) < 1e-8 * \
        np.max(np.abs(full.values))
    assert np.max(np.abs(R.values)) < 1e-5 * np.max(np.abs(S.values))
    # exact heat formula for the whole-line fast flow
    sq = np.sqrt(nu)
    zf = np.linspace(-10, 50, 12001)
    ker = np.exp(-(g.nodes[:, None] - zf[None, :]) ** 2 / (4 * sq * t)) \
        / np.sqrt(4 * np.pi * sq * t)
    conv = ker @ (np.exp(-((zf - 16.0) / 1.5) ** 2)) * (zf[1] - zf[0])
    exact = np.exp(-1j * alpha * 0.4 * t - alpha**2 * sq * t) * conv
    assert np.max(np.abs(S.values - exact)) < 1e-4 * np.max(np.abs(exact))


def test_split_fitted_growth_bound(sg_grid, tanh_prof):
    # ||S_a w|| <= C e^{tau t} e^{-(a^2-1) sqrt(nu) t / 2} ||w||: C finite
    prm = BLNormParams(beta=0.25, nu=1e-2, p=1)
    alpha, nu = 2, 1e-2
    op = OSOperator(alpha, nu, tanh_prof, sg_grid)
    om = grid_function(sg_grid, lambda z: np.exp(-((z - 2.0) / 0.9) ** 2))
    n0 = norm_1d(om, prm)
    tau = 0.1
    cs = []
    for t in (0.2, 0.6, 1.2):
        S, _ = split_sa_ra(om, alpha, t, nu, tanh_prof, op=op)
        env = np.exp(tau * t) * np.exp(-0.5 * (alpha**2 - 1) * np.sqrt(nu) * t)
        cs.append(norm_1d(S, prm) / (env * n0))
    assert np.all(np.isfinite(cs))
    assert max(cs) < 50.0


def test_measure_bounds_stable_profile(sg_grid, tanh_prof):
    prm = BLNormParams(beta=0.25, nu=1e-2, p=1)
    from blsg.norms import ModeWeights
    reps = measure_semigroup_bounds(
        tanh_prof, sg_grid, 1e-2, alphas=(1, 2), t_grid=[0.3, 1.0],
        prm=prm, w=ModeWeights.one_over_alpha_sq(2), s_orders=(0,),
        ensemble_size=1, rng=0, lam0=0.0, tau=0.1)
    assert all(r.verdict == "pass" for r in reps)
    assert all(np.isfinite(r.fitted_constant) for r in reps)


def test_duhamel_derivative_k1(sg_grid, tanh_prof):
    alpha, nu, t = 1, 1e-2, 0.5
    op = OSOperator(alpha, nu, tanh_prof, sg_grid)
    om = _compatible_bump(sg_grid, op)
    dz_duh = duhamel_derivative(om, alpha, t, nu, tanh_prof, k=1, op=op)
    th = apply_semigroup_contour(om, alpha, t, nu, tanh_prof, op=op)
    dz_dir = differentiate(th, 1)
    prm = BLNormParams(beta=0.25, nu=nu, p=2)
    rel = norm_1d(GridFunction(sg_grid, dz_duh.values - dz_dir.values), prm) \
        / norm_1d(dz_dir, prm)
    assert rel <= 1e-3


def test_duhamel_commutes_when_u_prime_vanishes(sg_grid, const_prof):
    # constant U: the Duhamel source vanishes; dz e^{Lt} w = fast-evolved dz w
    alpha, nu, t = 1, 1e-2, 0.3
    op = OSOperator(alpha, nu, const_prof, sg_grid)
    om = grid_function(sg_grid, lambda z: np.exp(-((z - 14.0) / 1.2) ** 2))
    dz_duh = duhamel_derivative(om, alpha, t, nu, const_prof, k=1, op=op)
    th = apply_semigroup_contour(om, alpha, t, nu, const_prof, op=op)
    dz_dir = differentiate(th, 1)
    rel = np.max(np.abs(dz_duh.values - dz_dir.values)) \
        / np.max(np.abs(dz_dir.values))
    assert rel < 1e-3
