"""CSV/JSON export with fixed schemas.

All floats are written with %.17g so files round-trip bit-exactly and
identical runs produce identical bytes; manifests carry parameters and
provenance but deliberately no timestamps. Schema changes bump
SCHEMA_VERSION.
"""

import json
import math

import numpy as np

SCHEMA_VERSION = 1


def _fmt(x):
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return "%.17g" % x
    return str(x)


def write_csv(path, header, rows):
    with open(path, "w") as f:
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(_fmt(x) for x in row) + "\n")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, float) and not math.isfinite(obj):
        return repr(obj)   # json has no inf/nan literals
    return obj


def write_manifest(path, payload: dict):
    """JSON manifest; caller supplies params/seed/dt/convergence fields."""
    body = {"schema_version": SCHEMA_VERSION}
    body.update(payload)
    with open(path, "w") as f:
        json.dump(_jsonable(body), f, indent=2, sort_keys=True)
        f.write("\n")


def write_band_csv(path, bd):
    def rows():
        for i, th in enumerate(bd.thetas):
            for n in range(bd.energies.shape[1]):
                yield (th, n + 1, bd.energies[i, n], bd.iprs[i, n],
                       bool(bd.edge_flags[i, n]))
    write_csv(path, ["theta", "index", "energy", "ipr", "edge_flag"], rows())


def write_trajectory_csv(path, traj, occ, site_densities: bool = False):
    header = ["t", "theta", "norm", "X_mean"]
    header += ["rho_%d" % n for n in occ.levels]
    L = traj.psis.shape[1]
    if site_densities:
        header += ["p_%d" % i for i in range(1, L + 1)]

    def rows():
        for i in range(traj.times.shape[0]):
            row = [traj.times[i], traj.thetas[i], traj.norms[i],
                   traj.xbars[i]]
            row += list(occ.rho[i])
            if site_densities:
                row += list(np.abs(traj.psis[i]) ** 2)
            yield row
    write_csv(path, header, rows())


def write_profile_csv(path, profile):
    """Long format: one row per (theta, partner), partners in pair order."""
    def rows():
        for i, th in enumerate(profile.thetas):
            for j in range(len(profile.pairs)):
                yield (th, profile.e_n[i], profile.e_m[i, j],
                       profile.O[i, j], profile.delta[i, j],
                       profile.N[i, j], profile.total[i])
    write_csv(path, ["theta", "E_n", "E_m", "O_nm", "Delta_nm", "N_nm",
                     "N_total"], rows())


def write_lzs_csv(path, series):
    write_csv(path, ["t", "rho", "energy_gap"],
              zip(series.times, series.rho, series.gaps))


def write_sweep_csv(path, sweep):
    header = [sweep.axis_name] + ["rho_%d" % n for n in sweep.levels]
    write_csv(path, header,
              ([sweep.values[i]] + list(sweep.rho[i])
               for i in range(sweep.values.shape[0])))


def write_ensemble_csv(path, records):
    """One row per seed; anticrossing details go to the manifest."""
    header = ["seed", "theta_start", "rho_edge", "min_edge_bulk_gap"]
    write_csv(path, header,
              ((r["seed"], r["theta_start"], r["rho_edge"],
                r["min_edge_bulk_gap"]) for r in records))


def write_naps_json(path, naps):
    with open(path, "w") as f:
        json.dump({"schema_version": SCHEMA_VERSION,
                   "naps": [float(x) for x in naps]}, f, indent=2)
        f.write("\n")
