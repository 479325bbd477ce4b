import numpy as np
import pytest

from blsg.errors import DomainError, UnsupportedOrderError
from blsg.grid import make_grid
from blsg.profiles import (eval_profile, heat_evolve, heat_evolve_fd_oracle,
                           jet_profile, table_profile, tanh_profile,
                           validate_profile)


def test_tanh_endpoints():
    p = tanh_profile(0.7, 1.0)
    assert eval_profile(p, 0, 0.0) == 0.0
    assert abs(eval_profile(p, 0, 30.0) - 0.7) < 1e-12


def test_jet_inflection_point():
    # U'' = U+ a^2 (1 - a z) e^{-a z} for the plain (q = 0) profile:
    # positive below z = 1/a, negative above
    p = jet_profile(1.0, 2.0, 0.0)
    z = np.linspace(0.0, 3.0, 300)
    u2 = eval_profile(p, 2, z)
    expected = 1.0 * 4.0 * (1 - 2 * z) * np.exp(-2 * z)
    assert np.allclose(u2, expected, atol=1e-12)
    assert u2[z < 0.49].min() > 0
    assert u2[z > 0.51].max() < 0


@pytest.mark.parametrize("prof", [tanh_profile(1.0, 1.0),
                                  jet_profile(1.0, 3.0, 0.0),
                                  jet_profile(2.0, 3.0, 2.0)])
def test_derivatives_match_finite_differences(prof):
    z = np.linspace(0.05, 6.0, 50)
    h = 1e-5
    for k in range(1, 5):
        fd = (eval_profile(prof, k - 1, z + h) - eval_profile(prof, k - 1, z - h)) / (2 * h)
        got = eval_profile(prof, k, z)
        assert np.max(np.abs(fd - got)) < 1e-6 * max(1.0, np.max(np.abs(got)))


@pytest.mark.parametrize("prof", [tanh_profile(1.0, 1.0), jet_profile(1.0, 3.0, 2.0)])
def test_decay_hypotheses(prof):
    measured = validate_profile(prof)
    for k, ck in measured.items():
        assert np.isfinite(ck)
        assert ck <= 1.05 * prof.c_k[k] + 1e-12


def test_domain_errors():
    p = tanh_profile()
    with pytest.raises(UnsupportedOrderError):
        eval_profile(p, 5, 1.0)
    with pytest.raises(DomainError):
        eval_profile(p, 0, -1.0)


def test_table_profile_roundtrip():
    z = np.linspace(0.0, 20.0, 400)
    u = 1.0 * np.tanh(z)
    p = table_profile(z, u, eta0=2.0)
    zq = np.linspace(0.3, 10.0, 37)
    assert np.max(np.abs(eval_profile(p, 0, zq) - np.tanh(zq))) < 1e-8
    assert np.max(np.abs(eval_profile(p, 1, zq) - 1 / np.cosh(zq) ** 2)) < 1e-5


def test_heat_evolve_tau_zero_identity(grid_std, tanh_prof):
    hot = heat_evolve(tanh_prof, 0.0, grid_std)
    assert np.allclose(hot.values.values,
                       eval_profile(tanh_prof, 0, grid_std.nodes))


def test_heat_evolve_wall_value(grid_std, tanh_prof):
    for tau in (0.01, 0.1, 0.5):
        hot = heat_evolve(tanh_prof, tau, grid_std)
        assert abs(hot.values.values[0]) < 1e-10


def test_heat_evolve_vs_fd_oracle(grid_std, tanh_prof):
    tau = 0.1
    hot = heat_evolve(tanh_prof, tau, grid_std)
    zo, uo = heat_evolve_fd_oracle(tanh_prof, tau, 30.0, 3001)
    ui = grid_std.interpolate(hot.values.values, zo).real
    assert np.max(np.abs(ui - uo)) < 1e-4


def test_heat_drift_linear_in_tau(grid_std, jet_prof):
    # |U_s(tau) - U| <= C ||U''||_inf tau with a tau-independent constant
    u0 = eval_profile(jet_prof, 0, grid_std.nodes)
    u2max = np.max(np.abs(eval_profile(jet_prof, 2, grid_std.nodes)))
    consts = []
    for tau in (0.01, 0.05, 0.1, 0.25, 0.5):
        hot = heat_evolve(jet_prof, tau, grid_std)
        drift = np.max(np.abs(hot.values.values.real - u0))
        consts.append(drift / (u2max * tau))
    consts = np.array(consts)
    assert np.all(consts <= 1.05)          # image-method constant is ~1
    assert consts.max() / consts.min() < 5.0


def test_heat_evolve_negative_tau(grid_std, tanh_prof):
    with pytest.raises(DomainError):
        heat_evolve(tanh_prof, -0.1, grid_std)
