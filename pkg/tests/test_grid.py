import numpy as np
import pytest

from blsg.errors import ParameterError, UnsupportedOrderError
from blsg.grid import (GridFunction, differentiate, grid_function, integrate,
                       make_grid)


def test_uniform_nodes_trivial():
    g = make_grid("uniform_fd", 8, 7.0)
    assert np.allclose(g.nodes, np.arange(8.0))


def test_grid_invariants():
    for scheme, kw in (("uniform_fd", {}), ("chebyshev_mapped", {"map_scale": 2.0})):
        g = make_grid(scheme, 64, 30.0, **kw)
        assert g.nodes[0] == 0.0 and g.nodes[-1] == g.z_max
        assert np.all(np.diff(g.nodes) > 0)
        assert np.all(g.quad_weights > 0)
        assert abs(g.quad_weights.sum() - g.z_max) < 1e-10 * g.z_max


def test_integrate_constants():
    g = make_grid("uniform_fd", 101, 10.0)
    assert abs(integrate(grid_function(g, lambda z: np.ones_like(z))) - 10.0) < 1e-10
    assert integrate(grid_function(g, lambda z: np.zeros_like(z))) == 0


def test_integrate_exponential_mapped():
    g = make_grid("chebyshev_mapped", 64, 40.0, 2.0)
    val = integrate(grid_function(g, np.exp)) if False else \
        integrate(grid_function(g, lambda z: np.exp(-z)))
    assert abs(val - (1.0 - np.exp(-40.0))) < 1e-8


def test_integrate_decaying():
    g = make_grid("chebyshev_mapped", 96, 20.0, 2.0)
    val = integrate(grid_function(g, lambda z: np.exp(-2 * z)))
    assert abs(val - 0.5 * (1 - np.exp(-40.0))) < 1e-8


def test_differentiate_constant_zero():
    for scheme in ("uniform_fd", "chebyshev_mapped"):
        g = make_grid(scheme, 64, 20.0, 2.0)
        d = differentiate(grid_function(g, lambda z: np.ones_like(z)), 1)
        assert np.max(np.abs(d.values)) < 1e-10


def test_uniform_exact_on_quadratics():
    g = make_grid("uniform_fd", 41, 4.0)
    f = grid_function(g, lambda z: z**2)
    d2 = differentiate(f, 2)
    assert np.max(np.abs(d2.values - 2.0)) < 1e-9
    d1 = differentiate(f, 1)
    assert np.max(np.abs(d1.values - 2.0 * g.nodes)) < 1e-9


def test_mapped_exact_on_computational_polynomials():
    # the mapped scheme differentiates polynomials in the computational
    # variable exactly; check via the chain rule with the known map
    g = make_grid("chebyshev_mapped", 48, 30.0, 2.0)
    xi = g._xi
    A, B = g._map_coeffs()
    dxi_dz = (B - xi) ** 2 / (A * (B + 1.0))
    for k in (2, 3, 5):
        f = GridFunction(g, (xi**k).astype(complex))
        d = differentiate(f, 1)
        exact = k * xi ** (k - 1) * dxi_dz
        assert np.max(np.abs(d.values - exact)) < 1e-9 * max(1, np.max(np.abs(exact)))


def test_mapped_exponential_derivative():
    g = make_grid("chebyshev_mapped", 64, 40.0, 2.0)
    d = differentiate(grid_function(g, lambda z: np.exp(-z)), 1)
    assert np.max(np.abs(d.values + np.exp(-g.nodes))) < 1e-7


def test_refinement_halves_fd_error():
    # second-order convergence: grid refinement cuts the error by >= 3.5x
    def err(n):
        g = make_grid("uniform_fd", n, 10.0)
        d = differentiate(grid_function(g, lambda z: np.sin(z)), 1)
        return np.max(np.abs(d.values - np.cos(g.nodes)))

    assert err(101) / err(201) >= 3.5


def test_derivative_integral_consistency():
    g = make_grid("chebyshev_mapped", 96, 30.0, 2.0)
    f = grid_function(g, lambda z: np.exp(-1.3 * z) * np.cos(z))
    df = differentiate(f, 1)
    total = integrate(df)
    assert abs(total - (f.values[-1] - f.values[0])) < 1e-8


def test_parameter_errors():
    with pytest.raises(ParameterError):
        make_grid("uniform_fd", 4, 10.0)
    with pytest.raises(ParameterError):
        make_grid("chebyshev_mapped", 32, 3.0, 2.0)   # z_max <= 2 map_scale
    with pytest.raises(ParameterError):
        make_grid("nope", 32, 10.0)
    g = make_grid("uniform_fd", 32, 10.0)
    with pytest.raises(UnsupportedOrderError):
        differentiate(grid_function(g, lambda z: z), 5)
    with pytest.raises(ParameterError):
        GridFunction(g, np.ones(5))
    with pytest.raises(ParameterError):
        GridFunction(g, np.full(32, np.nan))


def test_barycentric_interpolation():
    g = make_grid("chebyshev_mapped", 64, 30.0, 2.0)
    vals = np.exp(-g.nodes) * np.cos(g.nodes)
    zq = np.linspace(0.1, 12.0, 57)
    got = g.interpolate(vals, zq)
    assert np.max(np.abs(got - np.exp(-zq) * np.cos(zq))) < 1e-9
