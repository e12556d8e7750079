"""Command-line front end.

Exit codes: 0 success, 1 usage/configuration error, 2 numerical
failure (propagation aborts, eigensolver non-convergence, no usable
start phase).
"""

import argparse
import os
import sys
from dataclasses import fields, replace

import numpy as np

from . import io as eio
from .diagnostics import find_naps, non_adiabaticity_profile, occupations
from .harness import (RECIPES, RunConfig, UsageError, disorder_ensemble,
                      edge_slot, load_config, resolve_theta_start,
                      run_figure_recipe, slot_state, sweep_pump_time,
                      t_star_vs_L)
from .lzs import LzsParams, lzs_evolve
from .model import TWO_PI
from .propagate import (NoEdgeStateError, PropagationError, ThetaSchedule,
                        converged_evolve, evolve)
from .spectra import EigensolverError, band_diagram


def _add_common(sp):
    sp.add_argument("--config", help="flat key=value config file")
    sp.add_argument("--L", type=int)
    sp.add_argument("--V", type=float)
    sp.add_argument("--lam", type=float)
    sp.add_argument("--alpha", type=float)
    sp.add_argument("--W", type=float)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--seeds", help="comma-separated seed list")
    sp.add_argument("--theta-start", type=float, dest="theta_start")
    sp.add_argument("--cycle-margin", type=float, dest="cycle_margin")
    sp.add_argument("--T", type=float)
    sp.add_argument("--dt", help="step size, or 'auto' to halve until stable")
    sp.add_argument("--samples", type=int)
    sp.add_argument("--track", help="comma-separated 1-based level list")
    sp.add_argument("--branch", choices=("positive", "negative"))
    sp.add_argument("--out-dir", dest="out_dir")
    sp.add_argument("--workers", type=int)


def _config_from_args(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    updates = {}
    for f in fields(RunConfig):
        v = getattr(args, f.name, None)
        if v is None:
            continue
        if f.name in ("seeds", "track"):
            v = tuple(int(x) for x in v.split(",") if x.strip())
        elif f.name == "dt":
            v = None if v == "auto" else float(v)
        updates[f.name] = v
    if updates:
        cfg = replace(cfg, **updates)
    return cfg


def _parse_grid(spec: str) -> np.ndarray:
    """'a:b:step' inclusive-exclusive range, or 'v1,v2,...' literals."""
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            raise UsageError("grid must be start:stop:step or a comma list")
        a, b, s = (float(x) for x in parts)
        if s <= 0 or b <= a:
            raise UsageError("empty grid %r" % spec)
        return np.arange(a, b, s)
    return np.array([float(x) for x in spec.split(",") if x.strip()])


def _ensure_outdir(cfg):
    os.makedirs(cfg.out_dir, exist_ok=True)


def _cmd_bands(args):
    cfg = _config_from_args(args)
    _ensure_outdir(cfg)
    p = cfg.params()
    d = cfg.disorder()
    lo = cfg.theta_start if cfg.theta_start is not None else 0.0
    grid = np.linspace(lo, lo + TWO_PI + cfg.cycle_margin, args.ngrid)
    bd = band_diagram(p, d, grid)
    eio.write_band_csv(os.path.join(cfg.out_dir, "band.csv"), bd)
    eio.write_manifest(os.path.join(cfg.out_dir, "manifest.json"),
                       {"kind": "band-diagram", "theta_points": args.ngrid,
                        "config": cfg.to_text()})
    return 0


def _cmd_evolve(args):
    cfg = _config_from_args(args)
    _ensure_outdir(cfg)
    p = cfg.params()
    d = cfg.disorder()
    th0 = resolve_theta_start(cfg, d)
    sched = ThetaSchedule.one_cycle(th0, cfg.T, cfg.cycle_margin)
    psi0 = slot_state(p, d, th0)
    if cfg.dt is None:
        traj, report = converged_evolve(p, d, sched, psi0,
                                        samples=cfg.samples)
    else:
        traj = evolve(p, d, sched, psi0, dt=cfg.dt, samples=cfg.samples)
        report = {"mode": "fixed", "dt": traj.dt}
    occ = occupations(traj, p, d, cfg.track_levels())
    eio.write_trajectory_csv(os.path.join(cfg.out_dir, "trajectory.csv"),
                             traj, occ, site_densities=args.site_densities)
    eio.write_manifest(os.path.join(cfg.out_dir, "manifest.json"),
                       {"kind": "trajectory", "theta_start": th0,
                        "convergence": report, "config": cfg.to_text()})
    return 0


def _cmd_lzs(args):
    cfg = _config_from_args(args)
    _ensure_outdir(cfg)
    dt = 5e-4 if cfg.dt in (None, 0.05) else cfg.dt
    series = lzs_evolve(LzsParams(g=args.g, A=args.A, T=cfg.T), dt=dt,
                        samples=cfg.samples, branch=args.lzs_branch)
    eio.write_lzs_csv(os.path.join(cfg.out_dir, "lzs.csv"), series)
    eio.write_manifest(os.path.join(cfg.out_dir, "manifest.json"),
                       {"kind": "two-level", "g": args.g, "A": args.A,
                        "T": cfg.T, "dt": series.dt,
                        "norm_drift": series.norm_drift,
                        "branch": args.lzs_branch})
    return 0


def _cmd_sweep_t(args):
    cfg = _config_from_args(args)
    _ensure_outdir(cfg)
    sweep = sweep_pump_time(cfg, _parse_grid(args.t_grid),
                            min_height=args.min_height)
    eio.write_sweep_csv(os.path.join(cfg.out_dir, "sweep.csv"), sweep)
    eio.write_manifest(os.path.join(cfg.out_dir, "manifest.json"),
                       {"kind": "pump-time-sweep", "maxima": sweep.maxima,
                        "minima": sweep.minima, "t_star": sweep.t_star,
                        "t_star_peak": sweep.t_star_peak,
                        "failures": sweep.failures, "config": cfg.to_text()})
    return 0


def _cmd_scale_l(args):
    cfg = _config_from_args(args)
    _ensure_outdir(cfg)
    L_values = [int(x) for x in args.l_values.split(",") if x.strip()]
    sc = t_star_vs_L(cfg, L_values, min_height=args.min_height)
    eio.write_csv(os.path.join(cfg.out_dir, "scaling.csv"),
                  ["L", "t_star", "peak"],
                  ((L, sc.t_star[L], sc.peaks[L])
                   for L in sorted(sc.t_star)))
    eio.write_manifest(os.path.join(cfg.out_dir, "manifest.json"),
                       {"kind": "size-scaling", "slope": sc.slope,
                        "intercept": sc.intercept, "r2": sc.r2,
                        "excluded": sc.excluded, "config": cfg.to_text()})
    return 0


def _cmd_ensemble(args):
    cfg = _config_from_args(args)
    _ensure_outdir(cfg)
    ens = disorder_ensemble(cfg)
    eio.write_ensemble_csv(os.path.join(cfg.out_dir, "ensemble.csv"),
                           ens.records)
    eio.write_manifest(os.path.join(cfg.out_dir, "manifest.json"),
                       {"kind": "disorder-ensemble", "T": ens.T,
                        "median": ens.median, "q1": ens.q1, "q3": ens.q3,
                        "xi_band_center": ens.xi_band_center,
                        "records": ens.records, "failures": ens.failures,
                        "config": cfg.to_text()})
    return 0


def _cmd_recipe(args):
    cfg = _config_from_args(args)
    run_figure_recipe(args.name, cfg)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="edgepump",
        description="Adiabatic edge pumping in a hopping-modulated chain: "
                    "band diagrams, pump trajectories, interference sweeps, "
                    "disorder ensembles.")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("bands", help="band diagram over one cycle")
    _add_common(sp)
    sp.add_argument("--ngrid", type=int, default=512)
    sp.set_defaults(func=_cmd_bands)

    sp = sub.add_parser("evolve", help="one pump trajectory")
    _add_common(sp)
    sp.add_argument("--site-densities", action="store_true")
    sp.set_defaults(func=_cmd_evolve)

    sp = sub.add_parser("lzs", help="two-level interference run")
    _add_common(sp)
    sp.add_argument("--g", type=float, default=0.4)
    sp.add_argument("--A", type=float, default=4.0)
    sp.add_argument("--lzs-branch", choices=("excited", "ground"),
                    default="excited")
    sp.set_defaults(func=_cmd_lzs)

    sp = sub.add_parser("sweep-t", help="final occupations vs pump time")
    _add_common(sp)
    sp.add_argument("--t-grid", required=True,
                    help="start:stop:step or comma list")
    sp.add_argument("--min-height", type=float, default=0.9)
    sp.set_defaults(func=_cmd_sweep_t)

    sp = sub.add_parser("scale-l", help="first-maximum pump time vs size")
    _add_common(sp)
    sp.add_argument("--l-values", required=True, help="comma list of sizes")
    sp.add_argument("--min-height", type=float, default=0.9)
    sp.set_defaults(func=_cmd_scale_l)

    sp = sub.add_parser("ensemble", help="disorder ensemble at fixed T")
    _add_common(sp)
    sp.set_defaults(func=_cmd_ensemble)

    sp = sub.add_parser("recipe", help="write a named figure data bundle")
    _add_common(sp)
    sp.add_argument("name", choices=RECIPES)
    sp.set_defaults(func=_cmd_recipe)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        # argparse exits 2 on usage problems; remap to our contract
        return 0 if e.code == 0 else 1
    try:
        return args.func(args)
    except UsageError as e:
        print("error: %s" % e, file=sys.stderr)
        return 1
    except (PropagationError, EigensolverError, NoEdgeStateError,
            OverflowError) as e:
        print("numerical failure: %s" % e, file=sys.stderr)
        return 2
    except ValueError as e:
        # parameter rejected by a precondition (bad dt, bad level, ...)
        print("error: %s" % e, file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
