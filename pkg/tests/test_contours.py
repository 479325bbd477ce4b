import numpy as np
import pytest

from blsg.contours import (RA_LARGE_AT, RA_SMALL_AT_FAST, RA_SMALL_AT_SLOW,
                           SA_CASE1, SA_CASE2, build_contour, sa_case_for)
from blsg.errors import ContourGeometryError, ParameterError


def test_a_parameter_substitution():
    # |x - z| = 2, nu = 1, t = 1 -> a = 1
    path = build_contour(SA_CASE1, 1, 1.0, 1.0, theta0=0.1,
                         u_range=(0.0, 0.5), pair_dist=2.0)
    assert path.params["a"] == pytest.approx(1.0)


def test_gamma_lower_bound_both_cases():
    # gamma >= theta0 + alpha^2 sqrt(nu) / 2 in both sa cases
    theta0, alpha, nu = 0.1, 2, 1e-2
    sq = np.sqrt(nu)
    t = 0.05
    d_case1 = 2.0 * sq * t * np.sqrt(2 * theta0 / sq)   # a^2 sqrt(nu) = 2 theta0
    p1 = build_contour(SA_CASE1, alpha, t, nu, theta0=theta0,
                       u_range=(0.0, 1.0), pair_dist=d_case1)
    assert p1.params["gamma"] >= theta0 + 0.5 * alpha**2 * sq - 1e-12
    p2 = build_contour(SA_CASE2, alpha, t, nu, theta0=theta0,
                       u_range=(0.0, 1.0), pair_dist=0.05 * d_case1)
    assert p2.params["gamma"] == pytest.approx(theta0 + 0.5 * alpha**2 * sq)


def test_case_selection():
    assert sa_case_for(1, 0.01, 1e-2, 5.0, 0.1) == SA_CASE1
    assert sa_case_for(1, 1.0, 1e-2, 0.01, 0.1) == SA_CASE2


def test_ra_large_segment_endpoints():
    # Bromwich segment [gamma - i alpha M, gamma + i alpha M], M = 1 + sup|U|
    alpha, big_m = 2, 2.0
    path = build_contour(RA_LARGE_AT, alpha, 0.5, 1e-2, u_range=(0.0, 1.0),
                         lam0=0.3, tau=0.1, big_m=big_m)
    seg = [s for s in path.segments if "Bromwich" in s.comment][0]
    gamma = 0.3 + 0.1
    assert seg.start == pytest.approx(gamma - 1j * alpha * big_m)
    assert seg.end == pytest.approx(gamma + 1j * alpha * big_m)


def test_nodes_avoid_forbidden_strip():
    for kind, kw in ((SA_CASE1, {"pair_dist": 4.0}),
                     (RA_LARGE_AT, {"big_m": 1.8, "lam0": 0.0}),
                     (RA_SMALL_AT_FAST, {"big_m": 1.8}),
                     (RA_SMALL_AT_SLOW, {"big_m": 1.8, "pair_dist": 0.5})):
        path = build_contour(kind, 1, 0.02, 1e-2, theta0=0.1,
                             u_range=(0.0, 0.8), **kw)
        assert path.validate(1, 1e-2, (0.0, 0.8))


def test_degenerate_pair_contour_rejected():
    # the case-2 geometry collapses onto the branch cut at x = z
    with pytest.raises(ContourGeometryError):
        build_contour(SA_CASE2, 1, 0.5, 1e-2, theta0=0.1,
                      u_range=(0.4, 0.4), pair_dist=0.0)


def test_case_preconditions():
    with pytest.raises(ParameterError):
        build_contour(SA_CASE1, 1, 1.0, 1e-2, u_range=(0, 1), pair_dist=0.0)
    with pytest.raises(ParameterError):
        build_contour(RA_LARGE_AT, 1, 1.0, 1e-2, u_range=(0, 1))  # no M
    with pytest.raises(ParameterError):
        build_contour(RA_LARGE_AT, 0, 1.0, 1e-2, u_range=(0, 1), big_m=2.0)


@pytest.mark.parametrize("t", [1e-3, 0.1, 2.0])
def test_scalar_resolvent_quadrature(t):
    # (1/2 pi i) int e^{lam t} / (lam - s) dlam = e^{st} for enclosed poles
    kind = RA_SMALL_AT_FAST if t < 0.05 else RA_LARGE_AT
    path = build_contour(kind, 1, t, 1e-4, u_range=(0.0, 0.8), lam0=0.0,
                         tau=0.1, big_m=1.8)
    for s in (-0.3 - 0.5j, -3.0 + 0.2j, -30.0):
        f = np.exp(path.quad_nodes * t) / (path.quad_nodes - s)
        val = path.integrate(f) / (2j * np.pi)
        # deep poles close to the rays converge at reduced relative accuracy
        assert abs(val - np.exp(s * t)) < 1e-6 + 1e-3 * abs(np.exp(s * t))


def test_parabola_tail_truncation():
    path = build_contour(SA_CASE1, 1, 0.1, 1e-2, theta0=0.1,
                         u_range=(0.0, 1.0), pair_dist=1.0)
    t = 0.1
    peak = np.max(np.abs(np.exp(path.quad_nodes * t)))
    pb = [s for s in path.segments if s.kind == "parabola"]
    far = [pb[0].start, pb[-1].end]           # outward tail endpoints
    assert max(abs(np.exp(lam * t)) for lam in far) < 1e-12 * peak
