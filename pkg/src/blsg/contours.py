"""Complex integration contours for the semigroup representation.

Five geometries are built, tagged by the regime they serve:

* ``sa_case1`` / ``sa_case2``: per source-target pair (x, z) for the fast
  part of the semigroup; vertical segment between the local extremes of
  -i alpha U plus left-opening parabolas, with horizontal connectors in
  case 2 (a^2 sqrt(nu) <= theta0, where a = |x - z| / (2 sqrt(nu) t)).
* ``ra_large_at``: Bromwich segment [gamma - i alpha M, gamma + i alpha M]
  at gamma = Re(lam0) + tau with left-going horizontal rays; valid for all
  alpha and t and the default path for evaluating the full semigroup.
* ``ra_small_at_fast``: right half circle |lam| = alpha M with 45-degree
  rays, for the alpha t << 1 regime.
* ``ra_small_at_slow``: vertical segment at Re = a^2 - alpha^2 sqrt(nu)
  (a = |y - z| / (2 nu^{1/4} t) + sqrt(alpha M)) with left parabolas.

Every node is checked against the branch-cut set

    { lam = -s - alpha^2 sqrt(nu) - i alpha U(y),  s >= 0,  y in range },

across which the fast rate mu_f changes sign; a node inside it is a
geometry error.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ContourGeometryError, ParameterError

SA_CASE1 = "sa_case1"
SA_CASE2 = "sa_case2"
RA_LARGE_AT = "ra_large_at"
RA_SMALL_AT_FAST = "ra_small_at_fast"
RA_SMALL_AT_SLOW = "ra_small_at_slow"

_TAIL_LOG = 36.0     # e^{-36} ~ 2e-16 of the peak integrand


@dataclass
class Segment:
    kind: str                      # "segment" | "ray" | "parabola" | "arc"
    start: complex
    end: complex = None
    comment: str = ""


@dataclass
class ContourPath:
    case_tag: str
    segments: list
    quad_nodes: np.ndarray         # complex lambda nodes, ordered upward
    quad_weights: np.ndarray       # complex, include dlambda/ds
    params: dict = field(default_factory=dict)

    def validate(self, alpha: int, nu: float, u_range: tuple,
                 margin: float = 1e-10):
        """Assert no node touches the branch-cut strip."""
        re_cut = -alpha**2 * np.sqrt(nu)
        lo = -alpha * u_range[1] if alpha > 0 else -alpha * u_range[0]
        hi = -alpha * u_range[0] if alpha > 0 else -alpha * u_range[1]
        for lam in self.quad_nodes:
            if lam.real >= re_cut + margin:
                continue
            if lo - margin <= lam.imag <= hi + margin:
                raise ContourGeometryError(
                    f"contour node {lam:.6g} inside the forbidden strip",
                    node=lam)
        return True

    def integrate(self, f_nodes: np.ndarray) -> complex:
        """sum w_i f(lam_i); the caller supplies f at quad_nodes."""
        return complex(np.sum(self.quad_weights * f_nodes))


def _gl(n, a, b):
    x, w = np.polynomial.legendre.leggauss(n)
    return 0.5 * (a + b) + 0.5 * (b - a) * x, 0.5 * (b - a) * w


def _gl_panels(edges, n):
    xs, ws = [], []
    for a, b in zip(edges[:-1], edges[1:]):
        x, w = _gl(n, a, b)
        xs.append(x)
        ws.append(w)
    return np.concatenate(xs), np.concatenate(ws)


def _geom_edges(scale0, k_max, ratio=3.0):
    """Panel edges [0, s, s r, s r^2, ..., k_max]: the integrand varies on the
    O(scale0) scale near the origin and decays on the O(k_max) scale."""
    edges = [0.0]
    e = min(scale0, k_max)
    while e < k_max:
        edges.append(e)
        e *= ratio
    edges.append(k_max)
    return edges


def build_contour(kind: str, alpha: int, t: float, nu: float,
                  theta0: float = 0.1, u_range: tuple = (0.0, 1.0),
                  lam0: complex = 0.0, tau: float = 0.1, big_m: float = None,
                  pair_dist: float = 0.0, n_gauss: int = 32) -> ContourPath:
    """Assemble the contour `kind` with composite Gauss-Legendre quadrature.

    u_range: (min U, max U) over the relevant height interval (the pair
    interval [x, z] for sa contours, the whole half line otherwise).
    pair_dist: |x - z| for the pair-local geometries.
    """
    if t <= 0:
        raise ParameterError("contours require t > 0")
    if alpha < 1:
        raise ParameterError("contours are built for alpha >= 1")
    sq = np.sqrt(nu)
    umin, umax = float(u_range[0]), float(u_range[1])

    if kind in (SA_CASE1, SA_CASE2):
        a = pair_dist / (2.0 * sq * t)
        if kind == SA_CASE1 and a * a * sq < theta0:
            raise ParameterError("sa_case1 requires a^2 sqrt(nu) >= theta0")
        if kind == SA_CASE2 and a * a * sq > theta0:
            raise ParameterError("sa_case2 requires a^2 sqrt(nu) <= theta0")
        gamma_c = (a * a * sq if kind == SA_CASE1 else theta0) + 0.5 * alpha**2 * sq
        k_max = np.sqrt(_TAIL_LOG / (sq * t))
        nodes, weights, segs = [], [], []

        # lower parabola (Gamma_3), k: -k_max -> 0 at Im base -alpha*umax
        k, w = _gl_panels([-k_max, -0.3 * k_max, 0.0], n_gauss)
        lam = (a * a - k * k - 0.5 * alpha**2) * sq - 1j * alpha * umax \
            + 2j * sq * a * k
        nodes.append(lam)
        weights.append(w * (-2.0 * k * sq + 2j * sq * a))
        lam_far = (a * a - k_max**2 - 0.5 * alpha**2) * sq - 1j * alpha * umax \
            - 2j * sq * a * k_max
        lam_join = (a * a - 0.5 * alpha**2) * sq - 1j * alpha * umax
        segs.append(Segment("parabola", lam_far, lam_join, "lower parabola"))

        if kind == SA_CASE2:
            # lower connector (Gamma_5), k: a^2 sqrt(nu) -> theta0, rightward
            k, w = _gl(n_gauss, a * a * sq, theta0)
            lam = k - 0.5 * alpha**2 * sq - 1j * alpha * umax
            nodes.append(lam)
            weights.append(w * 1.0)
            segs.append(Segment("segment", lam[0], lam[-1], "lower connector"))

        # vertical segment (Gamma_1), c~: umax -> umin (Im increasing)
        if umax > umin:
            ctil, w = _gl(n_gauss, umin, umax)
            ctil = ctil[::-1]
            w = w[::-1]
            lam = gamma_c - alpha**2 * sq - 1j * alpha * ctil
            nodes.append(lam)
            weights.append(w * (1j * alpha))       # dlam = -i a dc~, c~ decreasing
            segs.append(Segment("segment", lam[0], lam[-1], "vertical segment"))

        if kind == SA_CASE2:
            # upper connector (Gamma_4), k: theta0 -> a^2 sqrt(nu), leftward
            k, w = _gl(n_gauss, a * a * sq, theta0)
            k = k[::-1]
            w = w[::-1]
            lam = k - 0.5 * alpha**2 * sq - 1j * alpha * umin
            nodes.append(lam)
            weights.append(w * (-1.0))
            segs.append(Segment("segment", lam[0], lam[-1], "upper connector"))

        # upper parabola (Gamma_2), k: 0 -> k_max at Im base -alpha*umin
        k, w = _gl_panels([0.0, 0.3 * k_max, k_max], n_gauss)
        lam = (a * a - k * k - 0.5 * alpha**2) * sq - 1j * alpha * umin \
            + 2j * sq * a * k
        nodes.append(lam)
        weights.append(w * (-2.0 * k * sq + 2j * sq * a))
        lam_join = (a * a - 0.5 * alpha**2) * sq - 1j * alpha * umin
        lam_far = (a * a - k_max**2 - 0.5 * alpha**2) * sq - 1j * alpha * umin \
            + 2j * sq * a * k_max
        segs.append(Segment("parabola", lam_join, lam_far, "upper parabola"))

        path = ContourPath(kind, segs, np.concatenate(nodes),
                           np.concatenate(weights),
                           {"a": a, "gamma": gamma_c, "theta0": theta0,
                            "t": t, "k_max": k_max})
        path.validate(alpha, nu, u_range)
        return path

    if kind == RA_LARGE_AT:
        if big_m is None:
            raise ParameterError("ra_large_at needs M >= 1 + sup|U|")
        gamma = float(np.real(lam0)) + tau
        k_max = _TAIL_LOG / t
        nodes, weights, segs = [], [], []
        ray_edges = _geom_edges(min(1.0, k_max / 3.0), k_max)
        # lower ray: lam = gamma - k - i alpha M, k: k_max -> 0
        k, w = _gl_panels(ray_edges, n_gauss)
        k = k[::-1]
        w = w[::-1]
        lam = gamma - k - 1j * alpha * big_m
        nodes.append(lam)
        weights.append(w * (+1.0))           # dlam = -dk, k decreasing
        segs.append(Segment("ray", lam[0], lam[-1], "lower ray"))
        # vertical segment: panels cluster around Im(lam0), where the
        # dominant eigenvalue sits a distance ~tau from the contour
        r = alpha * big_m
        m0 = float(np.clip(np.imag(lam0), -0.9 * r, 0.9 * r))
        h0 = max(2.0 * tau, 0.01 * r, 1e-6)
        edges = sorted({-r, r} | {float(np.clip(m0 + s_ * h0, -r, r))
                                  for s_ in (-9, -3, -1, 1, 3, 9)})
        merged = [edges[0]]
        for e in edges[1:]:
            if e - merged[-1] > 1e-9 * r:
                merged.append(e)
        merged[0], merged[-1] = -r, r
        edges = merged
        s, w = _gl_panels(edges, n_gauss)
        lam = gamma + 1j * s
        nodes.append(lam)
        weights.append(w * 1j)
        segs.append(Segment("segment", gamma - 1j * r, gamma + 1j * r,
                            "Bromwich segment"))
        # upper ray: k: 0 -> k_max
        k, w = _gl_panels(ray_edges, n_gauss)
        lam = gamma - k + 1j * alpha * big_m
        nodes.append(lam)
        weights.append(w * (-1.0))
        segs.append(Segment("ray", lam[0], lam[-1], "upper ray"))
        path = ContourPath(kind, segs, np.concatenate(nodes),
                           np.concatenate(weights),
                           {"gamma": gamma, "tau": tau, "M": big_m,
                            "t": t, "k_max": k_max})
        path.validate(alpha, nu, u_range)
        return path

    if kind == RA_SMALL_AT_FAST:
        if big_m is None:
            raise ParameterError("ra_small_at_fast needs M >= 1 + sup|U|")
        r = alpha * big_m
        k_max = _TAIL_LOG / t
        nodes, weights, segs = [], [], []
        ray_edges = _geom_edges(max(r / 3.0, min(1.0, k_max / 3.0)), k_max)
        # lower 45-degree ray: lam = k + i k - i r, k: -k_max -> 0
        k, w = _gl_panels([-e for e in ray_edges[::-1]], n_gauss)
        lam = k + 1j * k - 1j * r
        nodes.append(lam)
        weights.append(w * (1.0 + 1j))
        segs.append(Segment("ray", lam[0], lam[-1], "lower diagonal ray"))
        # right half circle, theta: -pi/2 -> pi/2
        th, w = _gl(2 * n_gauss, -np.pi / 2, np.pi / 2)
        lam = r * np.exp(1j * th)
        nodes.append(lam)
        weights.append(w * 1j * r * np.exp(1j * th))
        segs.append(Segment("arc", lam[0], lam[-1], "half circle |lam| = alpha M"))
        # upper ray: lam = -k + i k + i r, k: 0 -> k_max
        k, w = _gl_panels(ray_edges, n_gauss)
        lam = -k + 1j * k + 1j * r
        nodes.append(lam)
        weights.append(w * (-1.0 + 1j))
        segs.append(Segment("ray", lam[0], lam[-1], "upper diagonal ray"))
        path = ContourPath(kind, segs, np.concatenate(nodes),
                           np.concatenate(weights),
                           {"M": big_m, "t": t, "k_max": k_max})
        path.validate(alpha, nu, u_range)
        return path

    if kind == RA_SMALL_AT_SLOW:
        if big_m is None:
            raise ParameterError("ra_small_at_slow needs M >= 1 + sup|U|")
        a = pair_dist / (2.0 * nu**0.25 * t) + np.sqrt(alpha * big_m)
        base = a * a - alpha**2 * sq
        k_max = np.sqrt(_TAIL_LOG / t)
        nodes, weights, segs = [], [], []
        # lower parabola: lam = base - k^2 + 2 a i k - i alpha M, k: -k_max -> 0
        k, w = _gl_panels([-k_max, -0.3 * k_max, 0.0], n_gauss)
        lam = base - k * k + 2j * a * k - 1j * alpha * big_m
        nodes.append(lam)
        weights.append(w * (-2.0 * k + 2j * a))
        segs.append(Segment("parabola", lam[0], lam[-1], "lower parabola"))
        # vertical segment at Re = base
        s, w = _gl(2 * n_gauss, -alpha * big_m, alpha * big_m)
        lam = base + 1j * s
        nodes.append(lam)
        weights.append(w * 1j)
        segs.append(Segment("segment", lam[0], lam[-1], "vertical segment"))
        # upper parabola, k: 0 -> k_max
        k, w = _gl_panels([0.0, 0.3 * k_max, k_max], n_gauss)
        lam = base - k * k + 2j * a * k + 1j * alpha * big_m
        nodes.append(lam)
        weights.append(w * (-2.0 * k + 2j * a))
        segs.append(Segment("parabola", lam[0], lam[-1], "upper parabola"))
        path = ContourPath(kind, segs, np.concatenate(nodes),
                           np.concatenate(weights),
                           {"a": a, "M": big_m, "t": t, "k_max": k_max})
        path.validate(alpha, nu, u_range)
        return path

    raise ParameterError(f"unknown contour kind {kind!r}")


def sa_case_for(alpha: int, t: float, nu: float, pair_dist: float,
                theta0: float = 0.1) -> str:
    a = pair_dist / (2.0 * np.sqrt(nu) * t)
    return SA_CASE1 if a * a * np.sqrt(nu) >= theta0 else SA_CASE2
