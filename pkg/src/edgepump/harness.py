"""Run configuration, start-phase policy, sweeps, ensembles and recipes.

Conventions used throughout the orchestration layer:

* Levels are tracked by their sorted-spectrum index (1-based). The
  positive-branch edge level of a chain sits at the slot index returned
  by edge_slot; the start-phase policy guarantees the slot state at
  theta_start is the left edge state, and pumps are seeded from it.
* One theta_start is fixed per (L, W, seed) triple and shared by every
  T in a sweep, so interference fringes are comparable across T.
* Sweep points and ensemble seeds are independent tasks; results are
  keyed and sorted before aggregation, so output bytes do not depend on
  the worker count.
"""

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields, replace

import numpy as np

from . import io as eio
from .diagnostics import (find_naps, localization_length,
                          non_adiabaticity_profile)
from .model import (GOLDEN, TWO_PI, DisorderRealization, ModelParams,
                    build_hamiltonian, d_hamiltonian_d_theta, sample_disorder)
from .propagate import (NoEdgeStateError, PropagationError, ThetaSchedule,
                        converged_evolve, evolve, final_occupations)
from .spectra import EDGE_IPR_FACTOR, band_diagram, eigendecompose
from .lzs import LzsParams, lzs_evolve

CYCLE_MARGIN = 0.3          # phase overshoot past 2*pi, clears the second crossing
POLICY_GRID = 256           # theta candidates scanned for a start phase
PINNED_FAIL_SEED = 6        # L=105, W=0.08 realization with a squeezed anticrossing
GAP_REFINE_XTOL = 1e-8

# T grids bracketing the first principal occupation maximum per size
PINNED_T_GRIDS = {
    21: np.arange(250.0, 1000.0, 25.0),
    34: np.arange(700.0, 2000.0, 40.0),
    42: np.arange(1100.0, 2600.0, 50.0),
    55: np.arange(2400.0, 4200.0, 60.0),
    89: np.arange(6500.0, 9700.0, 100.0),
}

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


class UsageError(ValueError):
    """Bad configuration or arguments (CLI exit code 1)."""


def edge_slot(L: int, alpha: float = GOLDEN) -> int:
    """Sorted index (1-based) of the positive-branch edge level.

    The in-gap level count tracks the hopping modulation's winding:
    round(L * frac(alpha)) places the upper-gap edge level for the
    golden-mean family used here.
    """
    slot = int(round(L * (alpha - math.floor(alpha))))
    if not 1 <= slot <= L:
        raise ValueError("no edge slot for L=%d, alpha=%g" % (L, alpha))
    return slot


# ---------------------------------------------------------------------------
# configuration

_NONE = "none"


@dataclass(frozen=True)
class RunConfig:
    L: int = 42
    V: float = 8.0 / 15.0
    lam: float = 0.6
    alpha: float = GOLDEN
    W: float = 0.0
    seed: int | None = None
    seeds: tuple = ()
    theta_start: float | None = None
    cycle_margin: float = CYCLE_MARGIN
    T: float = 1300.0
    dt: float | None = 0.05
    samples: int = 401
    track: tuple = ()
    branch: str = "positive"
    out_dir: str = "out"
    workers: int = 1

    def params(self) -> ModelParams:
        return ModelParams(L=self.L, V=self.V, lam=self.lam,
                           alpha=self.alpha, W=self.W)

    def disorder(self, seed=None) -> DisorderRealization | None:
        s = self.seed if seed is None else seed
        if s is None:
            return None
        return sample_disorder(self.params(), s)

    def track_levels(self) -> tuple:
        if self.track:
            return tuple(self.track)
        ne = edge_slot(self.L, self.alpha)
        return (ne, ne + 1) if ne < self.L else (ne,)

    def to_text(self) -> str:
        out = []
        for f in fields(self):
            v = getattr(self, f.name)
            if v is None:
                s = _NONE
            elif isinstance(v, tuple):
                s = ",".join(str(int(x)) for x in v)
            elif isinstance(v, float):
                s = "%.17g" % v
            else:
                s = str(v)
            out.append("%s = %s" % (f.name, s))
        return "\n".join(out) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "RunConfig":
        known = {f.name: f for f in fields(cls)}
        seen = {}
        for ln, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError("line %d: expected 'key = value'" % ln)
            key, val = (s.strip() for s in line.split("=", 1))
            if key not in known:
                raise UsageError("line %d: unknown key %r" % (ln, key))
            if key in seen:
                raise UsageError("line %d: duplicate key %r" % (ln, key))
            seen[key] = _parse_field(key, val)
        return cls(**seen)


_INT_FIELDS = {"L", "samples", "workers"}
_OPT_INT_FIELDS = {"seed"}
_FLOAT_FIELDS = {"V", "lam", "alpha", "W", "cycle_margin", "T"}
_OPT_FLOAT_FIELDS = {"theta_start", "dt"}
_TUPLE_FIELDS = {"seeds", "track"}
_STR_FIELDS = {"branch", "out_dir"}


def _parse_field(key, val):
    try:
        if key in _INT_FIELDS:
            return int(val)
        if key in _OPT_INT_FIELDS:
            return None if val == _NONE else int(val)
        if key in _FLOAT_FIELDS:
            return float(val)
        if key in _OPT_FLOAT_FIELDS:
            return None if val == _NONE else float(val)
        if key in _TUPLE_FIELDS:
            return tuple(int(x) for x in val.split(",") if x.strip())
        if key in _STR_FIELDS:
            return val
    except ValueError as e:
        raise UsageError("key %r: %s" % (key, e)) from None
    raise UsageError("unhandled key %r" % key)


def load_config(path: str) -> RunConfig:
    with open(path) as f:
        return RunConfig.from_text(f.read())


# ---------------------------------------------------------------------------
# start-phase policy and single pumps

def theta_start_policy(p: ModelParams, d: DisorderRealization | None = None,
                       ngrid: int = POLICY_GRID):
    """Start phase where the slot state is localized at the left end.

    Scans ngrid phases over [0, 2pi), keeps those where the slot state
    has IPR >= 5/L and mean position < L/2, and returns the one with
    maximal IPR (first wins on ties). Returns None when no candidate
    exists. Changing the grid size or the tie-breaking changes every
    downstream regression number, so both are pinned.
    """
    ne = edge_slot(p.L, p.alpha) - 1
    x = np.arange(1, p.L + 1)
    best_ipr = -1.0
    best_th = None
    for th in np.linspace(0.0, TWO_PI, ngrid, endpoint=False):
        s = eigendecompose(build_hamiltonian(p, th, d), theta=th)
        psi = s.states[:, ne]
        ipr_v = float(np.sum(psi ** 4))
        if ipr_v < EDGE_IPR_FACTOR / p.L:
            continue
        if float(x @ psi ** 2) >= p.L / 2:
            continue
        if ipr_v > best_ipr:
            best_ipr, best_th = ipr_v, float(th)
    return best_th


def resolve_theta_start(cfg: RunConfig, d: DisorderRealization | None) -> float:
    if cfg.theta_start is not None:
        return cfg.theta_start
    th0 = theta_start_policy(cfg.params(), d)
    if th0 is None:
        raise NoEdgeStateError(
            "start policy found no left-localized slot state "
            "(L=%d, W=%g, seed=%r)" % (cfg.L, cfg.W, cfg.seed))
    return th0


def slot_state(p: ModelParams, d: DisorderRealization | None,
               theta: float) -> np.ndarray:
    s = eigendecompose(build_hamiltonian(p, theta, d), theta=theta)
    return s.states[:, edge_slot(p.L, p.alpha) - 1].astype(complex)


def pump_final_rho(p: ModelParams, d: DisorderRealization | None,
                   theta0: float, margin: float, T: float, dt: float,
                   levels: tuple) -> tuple:
    """Final occupations of the tracked levels after one pump cycle."""
    sched = ThetaSchedule.one_cycle(theta0, T, margin)
    psi0 = slot_state(p, d, theta0)
    traj = evolve(p, d, sched, psi0, dt=dt, samples=2)
    rho = final_occupations(p, d, traj)
    return tuple(float(rho[n - 1]) for n in levels)


def _golden_min(f, a, b, xtol):
    """Golden-section minimizer for a unimodal f on [a, b]."""
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    while (b - a) > xtol:
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    return ((c, fc) if fc <= fd else (d, fd))


def _golden_max(f, a, b, xtol):
    x, fx = _golden_min(lambda t: -f(t), a, b, xtol)
    return x, -fx


# ---------------------------------------------------------------------------
# sweeps

@dataclass(eq=False)
class SweepResult:
    axis_name: str
    values: np.ndarray
    levels: tuple
    rho: np.ndarray            # (npoints, nlevels); NaN rows for failures
    failures: list             # (axis value, message)
    maxima: list               # axis values at 3-point local maxima of rho_edge
    minima: list
    t_star: float | None       # refined first principal maximum
    t_star_peak: float | None


def _sweep_task(task):
    idx, cfg_text, T, theta0 = task
    cfg = RunConfig.from_text(cfg_text)
    try:
        rho = pump_final_rho(cfg.params(), cfg.disorder(), theta0,
                             cfg.cycle_margin, T, cfg.dt,
                             cfg.track_levels())
        return idx, rho, None
    except (PropagationError, NoEdgeStateError, ValueError) as e:
        return idx, None, str(e)


def _run_tasks(fn, tasks, workers):
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(fn, tasks))
    else:
        results = [fn(t) for t in tasks]
    return sorted(results, key=lambda r: r[0])


def sweep_pump_time(cfg: RunConfig, T_values, min_height: float = 0.9,
                    refine: bool = True) -> SweepResult:
    """Final occupations per pump time, with extremum detection.

    T_star is the first 3-point local maximum of the edge-level trace
    whose height reaches min_height, golden-section refined to about
    +-1% in T. Generic low-T interference bumps sit well below the
    principal maxima, which is what the height gate separates.
    """
    values = np.asarray(sorted(float(t) for t in T_values))
    if values.shape[0] < 1:
        raise UsageError("need at least one T value")
    if cfg.dt is None:
        raise UsageError("sweeps need a fixed dt")
    p = cfg.params()
    d = cfg.disorder()
    theta0 = resolve_theta_start(cfg, d)
    levels = cfg.track_levels()
    ne = edge_slot(cfg.L, cfg.alpha)
    if ne not in levels:
        levels = (ne,) + levels
    cfg = replace(cfg, track=levels)
    cfg_text = cfg.to_text()

    tasks = [(i, cfg_text, float(T), theta0) for i, T in enumerate(values)]
    rho = np.full((values.shape[0], len(levels)), np.nan)
    failures = []
    for idx, r, err in _run_tasks(_sweep_task, tasks, cfg.workers):
        if err is None:
            rho[idx] = r
        else:
            failures.append((float(values[idx]), err))

    edge_col = levels.index(ne)
    re_ = rho[:, edge_col]
    maxima, minima = [], []
    for i in range(1, values.shape[0] - 1):
        trip = re_[i - 1:i + 2]
        if np.isnan(trip).any():
            continue
        if re_[i] > re_[i - 1] and re_[i] > re_[i + 1]:
            maxima.append(float(values[i]))
        elif re_[i] < re_[i - 1] and re_[i] < re_[i + 1]:
            minima.append(float(values[i]))

    t_star = t_peak = None
    for i in range(1, values.shape[0] - 1):
        if float(values[i]) in maxima and re_[i] >= min_height:
            t_star, t_peak = float(values[i]), float(re_[i])
            if refine:
                f = lambda T: pump_final_rho(p, d, theta0, cfg.cycle_margin,
                                             T, cfg.dt, (ne,))[0]
                try:
                    t_star, t_peak = _golden_max(
                        f, float(values[i - 1]), float(values[i + 1]),
                        xtol=0.02 * float(values[i]))
                except (PropagationError, ValueError) as e:
                    failures.append((float(values[i]), "refine: %s" % e))
            break
    return SweepResult(axis_name="T", values=values, levels=levels, rho=rho,
                       failures=failures, maxima=maxima, minima=minima,
                       t_star=t_star, t_star_peak=t_peak)


def default_t_grid(L: int) -> np.ndarray:
    """Pinned bracket when we have one, else an empirical extrapolation."""
    if L in PINNED_T_GRIDS:
        return PINNED_T_GRIDS[L].copy()
    # first principal maximum grows close to L^1.8 over the sizes probed
    center = 582.0 * (L / 21.0) ** 1.8
    step = max(20.0, round(center / 30.0))
    return np.arange(0.55 * center, 1.35 * center, step)


@dataclass(eq=False)
class ScalingResult:
    L_values: tuple
    t_star: dict
    peaks: dict
    slope: float
    intercept: float
    r2: float
    excluded: list


def _linfit(x, y):
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    A = np.vstack([x, np.ones_like(x)]).T
    sol, *_ = np.linalg.lstsq(A, y, rcond=None)
    resid = A @ sol - y
    ss = float(np.sum((y - y.mean()) ** 2))
    r2 = 1.0 - float(resid @ resid) / ss if ss > 0 else 1.0
    return float(sol[0]), float(sol[1]), r2


def t_star_vs_L(cfg: RunConfig, L_values, t_grids=None,
                min_height: float = 0.9) -> ScalingResult:
    """First-maximum pump time per chain size, with a linear fit."""
    L_values = tuple(int(L) for L in L_values)
    if len(L_values) < 3:
        raise UsageError("need at least 3 sizes for a scaling fit")
    if cfg.W != 0:
        raise UsageError("size scaling is defined on the clean chain")
    t_star, peaks, excluded = {}, {}, []
    for L in L_values:
        sub = replace(cfg, L=L, seed=None, theta_start=None, track=())
        grid = (t_grids or {}).get(L) if t_grids else None
        if grid is None:
            grid = default_t_grid(L)
        sw = sweep_pump_time(sub, grid, min_height=min_height)
        if sw.t_star is None:
            excluded.append(L)
        else:
            t_star[L] = sw.t_star
            peaks[L] = sw.t_star_peak
    kept = sorted(t_star)
    if len(kept) < 3:
        raise PropagationError("fewer than 3 sizes yielded a maximum")
    slope, intercept, r2 = _linfit(kept, [t_star[L] for L in kept])
    return ScalingResult(L_values=L_values, t_star=t_star, peaks=peaks,
                         slope=slope, intercept=intercept, r2=r2,
                         excluded=excluded)


# ---------------------------------------------------------------------------
# near-edge anticrossings

@dataclass(frozen=True)
class AntiCrossing:
    theta: float
    gap: float
    pair: tuple        # 1-based sorted-level pair (lo, hi)
    n_value: float     # N_lo,hi at the refined gap minimum


def near_edge_anticrossings(p: ModelParams, d: DisorderRealization | None,
                            theta_lo: float, theta_hi: float,
                            ngrid: int = 2048) -> list:
    """Refined gap minima of the three sorted pairs around the edge slot.

    A coarse scan finds local minima of each pair gap; minima whose
    eigenvector pair contains a bulk-like member (IPR < 5/L) are
    golden-section refined. The bulk-member filter drops the exact
    edge-edge label-swap crossings (both members localized) while
    keeping edge-bulk anticrossings, including squeezed ones much
    narrower than the coarse grid: the gap trace stays V-shaped at
    coarse resolution, so the dip is detected and the refinement then
    resolves the true minimum.

    Caveat: when a coarse sample lands inside the hybridization zone
    of a narrow anticrossing, mixing can lift both members' IPR above
    the threshold and the event is dropped even though the unmixed
    partner is bulk-like. Rerun with a larger ngrid to recover such
    events.
    """
    ne0 = edge_slot(p.L, p.alpha) - 1
    pair_los = [lo for lo in (ne0 - 1, ne0, ne0 + 1) if 0 <= lo <= p.L - 2]
    grid = np.linspace(theta_lo, theta_hi, ngrid)
    gaps = np.empty((ngrid, len(pair_los)))
    for i, th in enumerate(grid):
        s = eigendecompose(build_hamiltonian(p, th, d), theta=th)
        for j, lo in enumerate(pair_los):
            gaps[i, j] = s.energies[lo + 1] - s.energies[lo]

    thr = EDGE_IPR_FACTOR / p.L
    out = []
    for j, lo in enumerate(pair_los):
        g = gaps[:, j]

        def pair_gap(th, lo=lo):
            s = eigendecompose(build_hamiltonian(p, th, d), theta=th)
            return float(s.energies[lo + 1] - s.energies[lo])

        for i in range(1, ngrid - 1):
            if not (g[i] < g[i - 1] and g[i] < g[i + 1]):
                continue
            s = eigendecompose(build_hamiltonian(p, grid[i], d),
                               theta=grid[i])
            ipr_lo = float(np.sum(s.states[:, lo] ** 4))
            ipr_hi = float(np.sum(s.states[:, lo + 1] ** 4))
            if not (ipr_lo < thr or ipr_hi < thr):
                continue
            th_min, gap_min = _golden_min(pair_gap, float(grid[i - 1]),
                                          float(grid[i + 1]),
                                          xtol=GAP_REFINE_XTOL)
            sm = eigendecompose(build_hamiltonian(p, th_min, d),
                                theta=th_min)
            dH = d_hamiltonian_d_theta(p, th_min)
            num = abs(sm.states[:, lo] @ dH.matvec(sm.states[:, lo + 1]))
            out.append(AntiCrossing(theta=float(th_min), gap=float(gap_min),
                                    pair=(lo + 1, lo + 2),
                                    n_value=float(num / gap_min ** 2)))
    # collapse duplicates from adjacent coarse minima of one dip
    seen = {}
    for ac in sorted(out, key=lambda a: a.gap):
        key = (ac.pair, round(ac.theta, 5))
        seen.setdefault(key, ac)
    return sorted(seen.values(), key=lambda a: a.theta)


# ---------------------------------------------------------------------------
# disorder ensembles

@dataclass(eq=False)
class EnsembleResult:
    seeds: tuple
    T: float
    records: list          # per-seed dicts, seed order
    failures: list         # (seed, message)
    median: float
    q1: float
    q3: float
    xi_band_center: float


def _ensemble_task(task):
    seed, cfg_text, T, scan = task
    cfg = RunConfig.from_text(cfg_text)
    p = cfg.params()
    d = sample_disorder(p, seed)
    th0 = theta_start_policy(p, d)
    if th0 is None:
        return seed, None, "no left-localized start phase"
    ne = edge_slot(cfg.L, cfg.alpha)
    try:
        rho = pump_final_rho(p, d, th0, cfg.cycle_margin, T, cfg.dt, (ne,))
    except (PropagationError, ValueError) as e:
        return seed, None, str(e)
    rec = {"seed": seed, "theta_start": th0, "rho_edge": rho[0]}
    if scan:
        acs = near_edge_anticrossings(p, d, th0,
                                      th0 + TWO_PI + cfg.cycle_margin)
        rec["min_edge_bulk_gap"] = min((a.gap for a in acs),
                                       default=math.inf)
        rec["anticrossings"] = [
            {"theta": a.theta, "gap": a.gap, "pair": list(a.pair),
             "N": a.n_value} for a in acs]
    else:
        rec["min_edge_bulk_gap"] = math.nan
        rec["anticrossings"] = []
    return seed, rec, None


def disorder_ensemble(cfg: RunConfig, seeds=None, T=None,
                      anticrossings: bool = True) -> EnsembleResult:
    """Per-seed pump outcome at fixed T, with anticrossing forensics.

    Each seed gets its own start phase from the policy applied to its
    disordered Hamiltonian. The reported localization length is the
    band-center weak-disorder value, the scale that must dwarf L for
    pumping to be conceivable at all.
    """
    if cfg.W <= 0:
        raise UsageError("ensembles need W > 0")
    if cfg.dt is None:
        raise UsageError("ensembles need a fixed dt")
    seeds = tuple(int(s) for s in (seeds if seeds is not None else cfg.seeds))
    if not seeds:
        raise UsageError("no seeds given")
    T = float(T if T is not None else cfg.T)
    cfg_text = cfg.to_text()
    tasks = [(s, cfg_text, T, anticrossings) for s in seeds]
    records, failures = [], []
    for seed, rec, err in _run_tasks(_ensemble_task, tasks, cfg.workers):
        if err is None:
            records.append(rec)
        else:
            failures.append((seed, err))
    finals = np.array([r["rho_edge"] for r in records]) if records else \
        np.array([math.nan])
    return EnsembleResult(
        seeds=seeds, T=T, records=records, failures=failures,
        median=float(np.median(finals)),
        q1=float(np.percentile(finals, 25.0)),
        q3=float(np.percentile(finals, 75.0)),
        xi_band_center=localization_length(cfg.W, cfg.V, 0.0))


# ---------------------------------------------------------------------------
# localized-regime scaling statistic

def regime_a_landmark(p: ModelParams, ngrid: int = 4096) -> float:
    """Phase where the slot state is most localized (clean chain).

    Coarse argmax of the slot-state IPR over [0, 2pi), then a 41-point
    refinement spanning +-0.002 rad. No in-gap filter: IPR dips inside
    hybridization windows, so the argmax never lands on a crossing.
    """
    ne = edge_slot(p.L, p.alpha) - 1
    best_ipr, best_th = -1.0, 0.0

    def look(th):
        nonlocal best_ipr, best_th
        s = eigendecompose(build_hamiltonian(p, th), theta=th)
        v = float(np.sum(s.states[:, ne] ** 4))
        if v > best_ipr:
            best_ipr, best_th = v, float(th)

    for th in np.linspace(0.0, TWO_PI, ngrid, endpoint=False):
        look(th)
    for th in np.linspace(best_th - 0.002, best_th + 0.002, 41):
        look(th)
    return best_th


def regime_a_statistic(p: ModelParams) -> tuple:
    """(landmark theta, dominant-pair non-adiabaticity) for a clean chain.

    The statistic is the LARGEST single bulk-partner N of the edge
    level at the landmark, not the sum over partners: the sum grows
    with L because the number of partners does, while the dominant
    pair tracks the per-channel coupling the pump actually fights.
    """
    th = regime_a_landmark(p)
    ne = edge_slot(p.L, p.alpha) - 1
    s = eigendecompose(build_hamiltonian(p, th), theta=th)
    dH = d_hamiltonian_d_theta(p, th)
    num = np.abs(s.states.T @ dH.matvec(s.states[:, ne]))
    gaps = np.abs(s.energies - s.energies[ne])
    iprs = np.sum(s.states ** 4, axis=0)
    m = iprs <= EDGE_IPR_FACTOR / p.L
    m[ne] = False
    m &= gaps > 1e-12
    if not m.any():
        raise PropagationError("no bulk partner at the landmark (L=%d)" % p.L)
    n_dom = float(np.max(num[m] / gaps[m] ** 2))
    return th, n_dom


def regime_a_scaling(L_values, V=8.0 / 15.0, lam=0.6, alpha=GOLDEN) -> dict:
    """Dominant-pair N at the landmark vs L, with a log-log fit."""
    L_values = tuple(int(L) for L in L_values)
    if len(L_values) < 3:
        raise UsageError("need at least 3 sizes")
    n_dom, thetas = {}, {}
    for L in L_values:
        p = ModelParams(L=L, V=V, lam=lam, alpha=alpha, W=0.0)
        thetas[L], n_dom[L] = regime_a_statistic(p)
    slope, intercept, r2 = _linfit(
        np.log([float(L) for L in L_values]),
        np.log([n_dom[L] for L in L_values]))
    return {"L_values": L_values, "theta_landmark": thetas, "n_dom": n_dom,
            "loglog_slope": slope, "loglog_intercept": intercept, "r2": r2}


# ---------------------------------------------------------------------------
# figure recipes

RECIPES = ("fig1b", "fig1d", "fig2", "fig3", "fig4", "fig5")


def _convergence_report(cfg):
    if cfg.dt is None:
        return {"mode": "halve-until-stable", "tol": 1e-6}
    return {"mode": "fixed", "dt": cfg.dt}


def _base_manifest(cfg: RunConfig, **extra):
    body = {"config": {f.name: getattr(cfg, f.name) for f in fields(cfg)},
            "convergence": _convergence_report(cfg)}
    from . import __version__
    body["code_version"] = __version__
    body.update(extra)
    return body


def _pump_trajectory(cfg, T, track, site_densities=False):
    from .diagnostics import occupations
    p = cfg.params()
    d = cfg.disorder()
    th0 = resolve_theta_start(cfg, d)
    sched = ThetaSchedule.one_cycle(th0, T, cfg.cycle_margin)
    psi0 = slot_state(p, d, th0)
    if cfg.dt is None:
        traj, report = converged_evolve(p, d, sched, psi0,
                                        samples=cfg.samples)
    else:
        traj = evolve(p, d, sched, psi0, dt=cfg.dt, samples=cfg.samples)
        report = {"mode": "fixed", "dt": traj.dt}
    occ = occupations(traj, p, d, track)
    return traj, occ, report, th0


def run_figure_recipe(name: str, cfg: RunConfig) -> dict:
    """Write one figure's data bundle under cfg.out_dir; returns manifest."""
    if name not in RECIPES:
        raise UsageError("unknown recipe %r (have: %s)"
                         % (name, ", ".join(RECIPES)))
    os.makedirs(cfg.out_dir, exist_ok=True)
    return globals()["_recipe_" + name](cfg)


def _out(cfg, fname):
    return os.path.join(cfg.out_dir, fname)


def _recipe_fig1b(cfg: RunConfig) -> dict:
    p = cfg.params()
    grid = np.linspace(0.0, TWO_PI + cfg.cycle_margin, 512)
    bd = band_diagram(p, cfg.disorder(), grid)
    eio.write_band_csv(_out(cfg, "band.csv"), bd)
    manifest = _base_manifest(cfg, kind="band-diagram",
                              files=["band.csv"], theta_points=512)
    eio.write_manifest(_out(cfg, "manifest.json"), manifest)
    return manifest


def _recipe_fig1d(cfg: RunConfig) -> dict:
    files = []
    for T in (20.0, 21.0):
        series = lzs_evolve(LzsParams(g=0.4, A=4.0, T=T), dt=5e-4)
        fname = "lzs_T%d.csv" % int(T)
        eio.write_lzs_csv(_out(cfg, fname), series)
        files.append(fname)
    manifest = _base_manifest(cfg, kind="two-level-interference",
                              files=files, g=0.4, A=4.0, dt=5e-4)
    eio.write_manifest(_out(cfg, "manifest.json"), manifest)
    return manifest


def _recipe_fig2(cfg: RunConfig) -> dict:
    ne = edge_slot(cfg.L, cfg.alpha)
    files = []
    for T in (1300.0, 1750.0, 9500.0):
        traj, occ, report, th0 = _pump_trajectory(cfg, T, (ne, ne + 1),
                                                  site_densities=True)
        fname = "trajectory_T%d.csv" % int(T)
        eio.write_trajectory_csv(_out(cfg, fname), traj, occ,
                                 site_densities=True)
        files.append(fname)
    sweep = sweep_pump_time(cfg, np.arange(500.0, 10001.0, 250.0))
    eio.write_sweep_csv(_out(cfg, "sweep.csv"), sweep)
    files.append("sweep.csv")
    scaling = t_star_vs_L(cfg, sorted(PINNED_T_GRIDS))
    eio.write_csv(_out(cfg, "scaling.csv"), ["L", "t_star", "peak"],
                  ((L, scaling.t_star[L], scaling.peaks[L])
                   for L in sorted(scaling.t_star)))
    files.append("scaling.csv")
    manifest = _base_manifest(
        cfg, kind="pump-overview", files=files,
        sweep={"maxima": sweep.maxima, "minima": sweep.minima,
               "t_star": sweep.t_star, "t_star_peak": sweep.t_star_peak},
        scaling={"slope": scaling.slope, "intercept": scaling.intercept,
                 "r2": scaling.r2,
                 "t_star": {str(k): v for k, v in scaling.t_star.items()}})
    eio.write_manifest(_out(cfg, "manifest.json"), manifest)
    return manifest


def _recipe_fig3(cfg: RunConfig) -> dict:
    ne = edge_slot(cfg.L, cfg.alpha)
    track = tuple(range(ne, min(ne + 4, cfg.L + 1)))
    files = []
    th0 = None
    for T in (1300.0, 1750.0, 9500.0):
        traj, occ, report, th0 = _pump_trajectory(cfg, T, track)
        fname = "occupations_T%d.csv" % int(T)
        eio.write_trajectory_csv(_out(cfg, fname), traj, occ)
        files.append(fname)
    grid = np.linspace(th0, th0 + TWO_PI + cfg.cycle_margin, 2048)
    prof = non_adiabaticity_profile(cfg.params(), cfg.disorder(), grid,
                                    ne, pair_set=(ne + 1,))
    eio.write_profile_csv(_out(cfg, "profile.csv"), prof)
    files.append("profile.csv")
    naps = find_naps(prof)
    eio.write_naps_json(_out(cfg, "naps.json"), naps)
    files.append("naps.json")
    manifest = _base_manifest(cfg, kind="occupation-traces", files=files,
                              theta_start=th0, naps=naps, levels=list(track))
    eio.write_manifest(_out(cfg, "manifest.json"), manifest)
    return manifest


def _recipe_fig4(cfg: RunConfig) -> dict:
    cfg = replace(cfg, W=cfg.W if cfg.W > 0 else 0.08)
    seeds = cfg.seeds if cfg.seeds else tuple(range(20))
    T = cfg.T if cfg.T != 1300.0 else 9100.0
    ens = disorder_ensemble(cfg, seeds=seeds, T=T)
    eio.write_ensemble_csv(_out(cfg, "ensemble.csv"), ens.records)
    files = ["ensemble.csv"]
    show = replace(cfg, seed=seeds[0], T=T)
    ne = edge_slot(cfg.L, cfg.alpha)
    traj, occ, report, th0 = _pump_trajectory(show, T, (ne, ne + 1))
    eio.write_trajectory_csv(_out(cfg, "trajectory_seed%d.csv" % seeds[0]),
                             traj, occ)
    files.append("trajectory_seed%d.csv" % seeds[0])
    grid = np.linspace(th0, th0 + TWO_PI + cfg.cycle_margin, 512)
    bd = band_diagram(show.params(), show.disorder(), grid)
    eio.write_band_csv(_out(cfg, "band_seed%d.csv" % seeds[0]), bd)
    files.append("band_seed%d.csv" % seeds[0])
    manifest = _base_manifest(
        cfg, kind="short-chain-disorder", files=files, T=T,
        ensemble={"median": ens.median, "q1": ens.q1, "q3": ens.q3,
                  "xi_band_center": ens.xi_band_center,
                  "records": ens.records, "failures": ens.failures})
    eio.write_manifest(_out(cfg, "manifest.json"), manifest)
    return manifest


def _recipe_fig5(cfg: RunConfig) -> dict:
    cfg = replace(cfg, L=105, W=cfg.W if cfg.W > 0 else 0.08,
                  seed=cfg.seed if cfg.seed is not None else PINNED_FAIL_SEED)
    p = cfg.params()
    d = cfg.disorder()
    th0 = resolve_theta_start(cfg, d)
    ne = edge_slot(cfg.L, cfg.alpha)
    files = []
    grid = np.linspace(th0, th0 + TWO_PI + cfg.cycle_margin, 512)
    bd = band_diagram(p, d, grid)
    eio.write_band_csv(_out(cfg, "band.csv"), bd)
    files.append("band.csv")
    track = tuple(range(ne, min(ne + 4, cfg.L + 1)))
    for T in (5000.0, 10000.0):
        traj, occ, report, _ = _pump_trajectory(cfg, T, track)
        fname = "occupations_T%d.csv" % int(T)
        eio.write_trajectory_csv(_out(cfg, fname), traj, occ)
        files.append(fname)
    pgrid = np.linspace(th0, th0 + TWO_PI + cfg.cycle_margin, 2048)
    for m in (ne + 1, ne + 2):
        prof = non_adiabaticity_profile(p, d, pgrid, ne, pair_set=(m,))
        fname = "profile_%d_%d.csv" % (ne, m)
        eio.write_profile_csv(_out(cfg, fname), prof)
        files.append(fname)
    acs = near_edge_anticrossings(p, d, th0, th0 + TWO_PI + cfg.cycle_margin)
    manifest = _base_manifest(
        cfg, kind="long-chain-breakdown", files=files, theta_start=th0,
        anticrossings=[{"theta": a.theta, "gap": a.gap,
                        "pair": list(a.pair), "N": a.n_value} for a in acs])
    eio.write_manifest(_out(cfg, "manifest.json"), manifest)
    return manifest
