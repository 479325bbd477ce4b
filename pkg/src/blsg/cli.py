"""Batch front end: blsg <spectrum|evans|semigroup|instability|norms>.

Every command reads one config file, runs deterministically for a fixed
(config, seed), writes CSV/JSON artifacts into the output directory, and
exits 0 only if all verdicts pass (1 verdict failure, 2 config error,
3 numerical failure).
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import __version__
from .config import RunConfig, load_config
from .elliptic import measure_elliptic_constants, random_decaying, solve_1d
from .errors import BlsgError, ParameterError
from .grid import GridFunction, grid_function
from .instability import (CascadeParams, build_cascade, envelope_fit,
                          horizon_and_amplitude, remainder_error)
from .norms import BLNormParams, layer_weight, norm_1d, phi_weight
from .orr_sommerfeld import (OSOperator, evans, evans_winding, os_spectrum,
                             rayleigh_spectrum)
from .profiles import heat_evolve, profile_on_grid
from .reports import write_csv, write_manifest
from .semigroup import (SemigroupConfig, apply_semigroup_contour,
                        apply_semigroup_oracle, default_big_m,
                        measure_semigroup_bounds)


def _pmap(fn, items, workers):
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(fn, items))


def _sg_config(cfg: RunConfig, lam0=0.0):
    return SemigroupConfig(lam0=lam0, tau=cfg.tau, theta0=cfg.theta0,
                           big_m=cfg.big_m_user or default_big_m(cfg.profile),
                           n_gauss=cfg.n_gauss)


def cmd_spectrum(cfg: RunConfig, out: str) -> int:
    rows = []
    lam0_by_alpha = {}
    for a in cfg.alpha_scan:
        cs = rayleigh_spectrum(a, cfg.profile, cfg.grid)
        lam0_by_alpha[a] = (-1j * a * cs[0]) if cs else 0.0
        for c in cs:
            lam = -1j * a * c
            rows.append((a, 0.0, c.real, c.imag, lam.real, lam.imag, 0.0, 0.0))
    lam0s = [l for l in lam0_by_alpha.values() if l != 0.0]
    lam0_max = max(lam0s, key=lambda l: l.real) if lam0s else 0.0
    stable = lam0_max == 0.0

    gaps = []

    def one(pair):
        a, nu = pair
        r = os_spectrum(a, cfg.profile, nu, cfg.grid,
                        track=(1j * lam0_by_alpha[a] / a)
                        if lam0_by_alpha[a] != 0.0 else None)
        d = evans(a, r.c_nu, cfg.profile, nu)
        return (a, nu, r, abs(d))

    pairs = [(a, nu) for a in cfg.alpha_set for nu in cfg.nu_list]
    for a, nu, r, dabs in _pmap(one, pairs, cfg.workers):
        rows.append((a, nu, r.c_nu.real, r.c_nu.imag, r.lam_nu.real,
                     r.lam_nu.imag, r.residual, dabs))
        if lam0_by_alpha.get(a, 0.0) != 0.0:
            gaps.append((nu, abs(r.lam_nu - lam0_by_alpha[a])))

    slope = None
    if len(gaps) >= 3:
        nus = np.array([g[0] for g in gaps])
        ds = np.array([g[1] for g in gaps])
        if np.all(ds > 0):
            slope = float(np.polyfit(np.log(nus), np.log(ds), 1)[0])

    write_csv(os.path.join(out, "spectrum.csv"),
              ["alpha", "nu", "re_c", "im_c", "re_lambda", "im_lambda",
               "residual", "evans_abs"], rows)
    write_manifest(os.path.join(out, "spectrum.json"), {
        "config": cfg.raw, "stable": stable,
        "lam0_max": lam0_max, "lam0_by_alpha": {str(k): v for k, v in
                                                lam0_by_alpha.items()},
        "sqrt_nu_slope": slope,
        "version": __version__,
    })
    return 0


def cmd_evans(cfg: RunConfig, out: str) -> int:
    nu = cfg.nu_list[0]
    win = cfg.evans_window
    res = np.linspace(win["re"][0], win["re"][1], win["n"])
    ims = np.linspace(win["im"][0], win["im"][1], win["n"])
    rows = []
    zeros = []
    fails = 0
    for a in cfg.alpha_set:
        vals = np.empty((win["n"], win["n"]), dtype=complex)
        for i, cre in enumerate(res):
            for j, cim in enumerate(ims):
                d = evans(a, complex(cre, cim), cfg.profile, nu)
                vals[i, j] = d
                rows.append((a, cre, cim, abs(d)))
        # local minima as zero candidates, polished by Newton on D
        for i in range(1, win["n"] - 1):
            for j in range(1, win["n"] - 1):
                box = np.abs(vals[i - 1:i + 2, j - 1:j + 2])
                if np.abs(vals[i, j]) == box.min() and box.min() < 0.5 * np.median(np.abs(vals)):
                    from scipy.optimize import fsolve
                    sol = fsolve(lambda v: [
                        (d := evans(a, complex(v[0], v[1]), cfg.profile, nu)).real,
                        d.imag], [res[i], ims[j]], full_output=True)
                    if sol[2] == 1:
                        c_zero = complex(sol[0][0], sol[0][1])
                        wn = evans_winding(a, c_zero, 0.02, cfg.profile, nu)
                        r = os_spectrum(a, cfg.profile, nu, cfg.grid, track=c_zero)
                        match = abs(r.c_nu - c_zero)
                        zeros.append({"alpha": a, "c": c_zero, "winding": wn,
                                      "eig_match_dist": match})
                        if match > 1e-4 or wn != 1:
                            fails += 1
    write_csv(os.path.join(out, "evans_scan.csv"),
              ["alpha", "re_c", "im_c", "abs_D"], rows)
    write_manifest(os.path.join(out, "evans.json"), {
        "config": cfg.raw, "nu": nu, "zeros": zeros, "version": __version__})
    return 1 if fails else 0


def cmd_semigroup(cfg: RunConfig, out: str) -> int:
    rng = np.random.default_rng(cfg.seed)
    fails = 0
    rows = []
    lam0 = 0.0
    for a in cfg.alpha_scan:
        cs = rayleigh_spectrum(a, cfg.profile, cfg.grid)
        if cs:
            lam = -1j * a * cs[0]
            if lam.real > np.real(lam0):
                lam0 = lam
    sgc = _sg_config(cfg, lam0=lam0)
    for nu in cfg.nu_list:
        prm = cfg.norm_params_at(nu)
        for a in cfg.alpha_set:
            op = OSOperator(a, nu, cfg.profile, cfg.grid)
            om_vals = random_decaying(cfg.grid, prm, rng, a, layered=False)
            om_fn = lambda z: cfg.grid.interpolate(om_vals, z)
            t_list = [t for t in cfg.t_grid if t > 0]
            zo, snaps = apply_semigroup_oracle(om_fn, a, t_list, nu,
                                               cfg.profile,
                                               z_max=cfg.grid.z_max, n=6001)
            for t in t_list:
                th = apply_semigroup_contour(
                    GridFunction(cfg.grid, om_vals), a, t, nu, cfg.profile,
                    op=op, cfg=sgc)
                oi = np.interp(cfg.grid.nodes, zo, snaps[t].real) + \
                    1j * np.interp(cfg.grid.nodes, zo, snaps[t].imag)
                rel = float(np.max(np.abs(th.values - oi))
                            / max(np.max(np.abs(oi)), 1e-300))
                rows.append((a, nu, t, rel))
                if rel > 1e-3:
                    fails += 1
    reports = []
    for nu in cfg.nu_list:
        prm = cfg.norm_params_at(nu)
        reps = measure_semigroup_bounds(
            cfg.profile, cfg.grid, nu, cfg.alpha_set, cfg.t_grid, prm,
            w=cfg.weights, s_orders=(0, 1), ensemble_size=cfg.ensemble_size,
            rng=cfg.seed, lam0=lam0, tau=cfg.tau, theta0=cfg.theta0)
        for r in reps:
            reports.append({"nu": nu, **r.as_dict()})
            if r.verdict != "pass":
                fails += 1
    write_csv(os.path.join(out, "oracle_agreement.csv"),
              ["alpha", "nu", "t", "rel_sup_err"], rows)
    write_manifest(os.path.join(out, "semigroup.json"), {
        "config": cfg.raw, "lam0": lam0, "bound_reports": reports,
        "version": __version__})
    return 1 if fails else 0


def cmd_instability(cfg: RunConfig, out: str) -> int:
    fails = 0
    curves = []
    manifest = {"config": cfg.raw, "runs": [], "version": __version__}
    for nu in cfg.nu_list:
        cp = CascadeParams(**cfg.cascade)
        prm = cfg.norm_params_at(nu)
        state = build_cascade(cp, cfg.profile, nu, cfg.grid, prm=prm,
                              weights=cfg.weights, alphas=tuple(cfg.alpha_scan))
        fits = envelope_fit(state)
        rem = remainder_error(state, cp, nu)
        amp = horizon_and_amplitude(state, cp, nu)
        t_closed = cp.horizon(nu, state.lam_0.real)
        ok = (all(np.isfinite(list(fits.values())))
              and rem["within_10pct"] and amp["bracket_ok"]
              and 0.5 <= amp["amplification_ratio"] <= 2.0
              and abs(amp["t_nu"] - t_closed) < 1e-12 * max(1.0, t_closed))
        if not ok:
            fails += 1
        manifest["runs"].append({
            "nu": nu, "lam_nu": state.lam_nu, "lam_0": state.lam_0,
            "alpha_star": state.alpha_star, "t_nu": amp["t_nu"],
            "envelope_constants": {str(k): v for k, v in fits.items()},
            "remainder_fitted_exponent": rem["fitted_exponent"],
            "remainder_target_exponent": rem["target_exponent"],
            "theta1": amp["theta1"], "theta2": amp["theta2"],
            "amplification": amp["amplification"],
            "amplification_ratio": amp["amplification_ratio"],
            "verdict": "pass" if ok else "fail",
        })
        for i, t in enumerate(state.t_samples):
            row = [nu, t] + [state.norms_j[j][i] for j in sorted(state.norms_j)]
            row.append(rem["remainder_norms"][i])
            curves.append(row)
    nj = max(len(r) for r in curves) - 3
    write_csv(os.path.join(out, "cascade_curves.csv"),
              ["nu", "t"] + [f"norm_omega_{j}" for j in range(nj)]
              + ["remainder_norm"], curves)
    write_manifest(os.path.join(out, "instability.json"), manifest)
    return 1 if fails else 0


def cmd_norms(cfg: RunConfig, out: str) -> int:
    rng = np.random.default_rng(cfg.seed)
    nu = cfg.nu_list[0]
    prm = cfg.norm_params_at(nu)
    g = cfg.grid
    fails = 0

    # phi-product inequality (pointwise, the layer-weight lemma)
    zs = np.linspace(0.0, 100.0, 4001)
    viol = 0
    for q in (1, 2, 3):
        for qp in (1, 2, 3):
            lhs = phi_weight(prm.big_p + q - 1, zs) * phi_weight(prm.big_p + qp - 1, zs)
            rhs = phi_weight(prm.big_p + q + qp - 1, zs)
            viol += int(np.any(lhs > rhs + 1e-14))
    if viol:
        fails += 1

    # monotonicity and algebra on random smooth decaying pairs
    mono_bad = alg_bad = 0
    for _ in range(1000):
        f = random_decaying(g, prm, rng, alpha=1, layered=True)
        fv = GridFunction(g, f)
        n1 = norm_1d(fv, prm.with_p(2))
        n0 = norm_1d(fv, prm.with_p(1))
        if n1 > n0 * (1 + 1e-12):
            mono_bad += 1
        a = random_decaying(g, prm, rng, alpha=1, layered=False)
        b = random_decaying(g, prm, rng, alpha=1, layered=False)
        na = norm_1d(GridFunction(g, a), prm.with_p(1))
        nb = norm_1d(GridFunction(g, b), prm.with_p(1))
        nab = norm_1d(GridFunction(g, a * b), prm.with_p(2))
        if nab > na * nb * (1 + 1e-12):
            alg_bad += 1
    fails += int(mono_bad > 0) + int(alg_bad > 0)

    rep = measure_elliptic_constants(g, prm, alphas=(1, 2, 4, 8, 16, 32),
                                     n_samples=cfg.ensemble_size * 10,
                                     rng=cfg.seed)
    if any(rep["flagged"].values()):
        fails += 1
    write_manifest(os.path.join(out, "norms.json"), {
        "config": cfg.raw,
        "phi_product_violations": viol,
        "monotonicity_violations": mono_bad,
        "algebra_violations": alg_bad,
        "elliptic_constants": {k: {str(a): v for a, v in d.items()}
                               for k, d in rep["constants"].items()},
        "elliptic_slopes": rep["slopes"],
        "elliptic_flagged": rep["flagged"],
        "version": __version__,
    })
    return 1 if fails else 0


_COMMANDS = {
    "spectrum": cmd_spectrum,
    "evans": cmd_evans,
    "semigroup": cmd_semigroup,
    "instability": cmd_instability,
    "norms": cmd_norms,
}


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="blsg",
                                 description="boundary-layer semigroup toolkit")
    ap.add_argument("command", choices=sorted(_COMMANDS))
    ap.add_argument("--config", required=True)
    ap.add_argument("--out", default=None)
    ap.add_argument("--workers", type=int, default=None)
    ap.add_argument("--seed", type=int, default=None)
    ap.add_argument("--set", dest="overrides", action="append", default=[],
                    metavar="section.key=value")
    args = ap.parse_args(argv)

    try:
        cfg = load_config(args.config, overrides=args.overrides)
        if args.workers is not None:
            cfg.workers = args.workers
        if args.seed is not None:
            cfg.seed = args.seed
        out = args.out or cfg.out_dir
        os.makedirs(out, exist_ok=True)
    except (ParameterError, OSError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        return _COMMANDS[args.command](cfg, out)
    except ParameterError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except (BlsgError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
