"""Run configuration: structured-text (INI) files with CLI overrides.

Sections and keys are fixed; unknown keys are rejected so typos fail loudly.
Numeric lists are comma-separated.  `--set section.key=value` overrides.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError
from .grid import CHEBYSHEV_MAPPED, UNIFORM_FD, HalfLineGrid, make_grid
from .norms import BLNormParams, ModeWeights
from .profiles import (ShearProfile, jet_profile, table_profile, tanh_profile)

_KNOWN = {
    "profile": {"kind", "u_plus", "a", "q", "table_csv", "eta0"},
    "grid": {"scheme", "n", "z_max", "map_scale"},
    "norms": {"beta", "gamma", "big_p", "p_layer", "rho", "alpha_max"},
    "contour": {"theta0", "big_m", "tau", "n_gauss"},
    "cascade": {"p", "m_depth", "s", "delta_exp", "n_time_nodes",
                "horizon_mode"},
    "run": {"nu_list", "alpha_set", "seed", "out_dir", "workers",
            "t_grid", "ensemble_size", "c_re_window", "c_im_window",
            "scan_points", "alpha_scan"},
}


@dataclass
class RunConfig:
    profile: ShearProfile
    grid: HalfLineGrid
    norm_params: BLNormParams          # nu filled per run
    weights: ModeWeights
    nu_list: list
    alpha_set: list
    seed: int
    out_dir: str
    workers: int
    theta0: float
    big_m_user: float                  # None -> 1 + sup|U|
    tau: float
    n_gauss: int
    cascade: dict
    t_grid: list
    ensemble_size: int
    evans_window: dict
    alpha_scan: list
    raw: dict = field(default_factory=dict)

    def norm_params_at(self, nu: float) -> BLNormParams:
        b = self.norm_params
        return BLNormParams(b.beta, b.gamma, b.big_p, b.p, nu)


def _floats(s):
    return [float(x) for x in str(s).split(",") if str(x).strip()]


def _ints(s):
    return [int(x) for x in str(s).split(",") if str(x).strip()]


def load_config(path: str, overrides=()) -> RunConfig:
    cp = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    read = cp.read(path)
    if not read:
        raise ParameterError(f"config file {path!r} not found or unreadable")
    for kv in overrides:
        if "=" not in kv or "." not in kv.split("=", 1)[0]:
            raise ParameterError(f"override {kv!r} must be section.key=value")
        sk, val = kv.split("=", 1)
        sec, key = sk.split(".", 1)
        if not cp.has_section(sec):
            cp.add_section(sec)
        cp.set(sec.strip(), key.strip(), val.strip())

    for sec in cp.sections():
        if sec not in _KNOWN:
            raise ParameterError(f"unknown config section [{sec}]")
        for key in cp[sec]:
            if key not in _KNOWN[sec]:
                raise ParameterError(f"unknown key {key!r} in section [{sec}]")

    def get(sec, key, default=None, cast=str):
        if cp.has_option(sec, key):
            return cast(cp.get(sec, key))
        if default is None:
            raise ParameterError(f"missing required config key [{sec}] {key}")
        return default

    kind = get("profile", "kind", "tanh_monotone")
    u_plus = get("profile", "u_plus", 1.0, float)
    if kind == "tanh_monotone":
        prof = tanh_profile(u_plus, get("profile", "a", 1.0, float))
    elif kind == "inflectional_jet":
        prof = jet_profile(u_plus, get("profile", "a", 3.0, float),
                           get("profile", "q", 0.0, float))
    elif kind == "custom_table":
        csv_path = get("profile", "table_csv")
        data = np.loadtxt(csv_path, delimiter=",")
        prof = table_profile(data[:, 0], data[:, 1], u_plus=u_plus,
                             eta0=get("profile", "eta0", 1.0, float))
    else:
        raise ParameterError(f"unknown profile kind {kind!r}")

    scheme = get("grid", "scheme", CHEBYSHEV_MAPPED)
    if scheme not in (CHEBYSHEV_MAPPED, UNIFORM_FD):
        raise ParameterError(f"unknown grid scheme {scheme!r}")
    beta = get("norms", "beta", 0.25, float)
    z_default = max(20.0 / beta, 10.0 / prof.eta0)
    grid = make_grid(scheme, get("grid", "n", 192, int),
                     get("grid", "z_max", z_default, float),
                     get("grid", "map_scale", 2.0, float))

    prm = BLNormParams(beta, get("norms", "gamma", 1.0, float),
                       get("norms", "big_p", 2.0, float),
                       get("norms", "p_layer", 1, int), nu=1.0)
    rho_kind = get("norms", "rho", "one_over_alpha_sq")
    amax = get("norms", "alpha_max", 4, int)
    if rho_kind == "one_over_alpha_sq":
        weights = ModeWeights.one_over_alpha_sq(amax)
    elif rho_kind == "uniform":
        weights = ModeWeights.uniform([a for a in range(-amax, amax + 1)])
    else:
        raise ParameterError(f"unknown rho spec {rho_kind!r}")

    cascade = {
        "p": get("cascade", "p", 2, int),
        "big_m": get("cascade", "m_depth", 2, int),
        "s": get("cascade", "s", 1, int),
        "delta_exp": get("cascade", "delta_exp", 1.2, float),
        "n_time_nodes": get("cascade", "n_time_nodes", 13, int),
        "horizon_mode": get("cascade", "horizon_mode", "nu_delta"),
    }
    evans_window = {
        "re": _floats(get("run", "c_re_window", "0.0,0.4")),
        "im": _floats(get("run", "c_im_window", "0.02,0.45")),
        "n": get("run", "scan_points", 9, int),
    }

    return RunConfig(
        profile=prof, grid=grid, norm_params=prm, weights=weights,
        nu_list=_floats(get("run", "nu_list", "1e-2")),
        alpha_set=_ints(get("run", "alpha_set", "1,2")),
        seed=get("run", "seed", 0, int),
        out_dir=get("run", "out_dir", "out"),
        workers=get("run", "workers", 1, int),
        theta0=get("contour", "theta0", 0.1, float),
        big_m_user=(float(cp.get("contour", "big_m"))
                    if cp.has_option("contour", "big_m") else None),
        tau=get("contour", "tau", 0.1, float),
        n_gauss=get("contour", "n_gauss", 32, int),
        cascade=cascade,
        t_grid=_floats(get("run", "t_grid", "0.2,0.5,1.0,2.0")),
        ensemble_size=get("run", "ensemble_size", 2, int),
        evans_window=evans_window,
        alpha_scan=_ints(get("run", "alpha_scan", "1,2,3")),
        raw={s: dict(cp[s]) for s in cp.sections()},
    )
