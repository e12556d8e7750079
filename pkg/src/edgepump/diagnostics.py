"""Analysis quantities built on top of the spectra and trajectories.

Occupations project a propagated state onto the instantaneous eigenbasis.
The derivative coupling between levels n and m is evaluated in
Hellmann-Feynman form, O_nm = |<n| dH/dtheta |m>| / |E_m - E_n|, which
is gauge-free and needs no eigenvector differentiation; the
non-adiabaticity of the pair is N_nm = O_nm / Delta_nm (so the bare
matrix element is divided by the gap squared). Peaks of the aggregate
profile mark the points where adiabaticity is most fragile.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .model import (ModelParams, DisorderRealization, TridiagonalOperator,
                    build_hamiltonian, d_hamiltonian_d_theta)
from .spectra import eigendecompose

GAP_FLOOR = 1e-12       # below this a pair is treated as degenerate


class DegeneratePairError(ValueError):
    """Raised when a coupling is requested across a gap below GAP_FLOOR."""


@dataclass(eq=False)
class OccupationSeries:
    times: np.ndarray
    thetas: np.ndarray
    levels: tuple          # tracked level indices, 1-based
    rho: np.ndarray        # (nsamples, nlevels)

    def level(self, n: int) -> np.ndarray:
        return self.rho[:, self.levels.index(n)]


def occupations(traj, p: ModelParams, d: DisorderRealization | None,
                track_set=None) -> OccupationSeries:
    """rho_n(t) = |<psi_n(theta(t))|psi(t)>|^2 for each tracked level."""
    levels = tuple(range(1, p.L + 1)) if track_set is None else tuple(track_set)
    for n in levels:
        if not 1 <= n <= p.L:
            raise ValueError("level %r out of range 1..%d" % (n, p.L))
    cols = np.array(levels) - 1
    rho = np.empty((traj.times.shape[0], len(levels)))
    for i, th in enumerate(traj.thetas):
        s = eigendecompose(build_hamiltonian(p, th, d), theta=th)
        amps = s.states[:, cols].T @ traj.psis[i]
        rho[i] = np.abs(amps) ** 2
    return OccupationSeries(times=traj.times.copy(), thetas=traj.thetas.copy(),
                            levels=levels, rho=rho)


def coupling_overlap(s, dH: TridiagonalOperator, n: int, m: int) -> float:
    """Derivative coupling O_nm between levels n and m (1-based)."""
    if n == m:
        raise ValueError("need two distinct levels")
    gap = abs(s.energies[m - 1] - s.energies[n - 1])
    if gap < GAP_FLOOR:
        raise DegeneratePairError(
            "levels %d and %d are degenerate (gap %.3g)" % (n, m, gap))
    num = abs(s.states[:, n - 1] @ dH.matvec(s.states[:, m - 1]))
    return float(num / gap)


@dataclass(eq=False)
class NonAdiabaticityProfile:
    thetas: np.ndarray
    n: int                  # reference level, 1-based
    pairs: tuple            # partner levels m, 1-based
    e_n: np.ndarray         # (ntheta,)
    e_m: np.ndarray         # (ntheta, npairs)
    O: np.ndarray           # (ntheta, npairs), NaN where excluded
    delta: np.ndarray       # (ntheta, npairs)
    N: np.ndarray           # (ntheta, npairs), NaN where excluded
    total: np.ndarray       # (ntheta,), degenerate pairs contribute 0
    excluded: list = field(default_factory=list)   # (theta, m, gap) records

    def pair_series(self, m: int) -> np.ndarray:
        return self.N[:, self.pairs.index(m)]

    def top_pairs(self, k: int = 3) -> list:
        """Partner levels ranked by their peak N over the grid."""
        peak = np.nanmax(np.where(np.isnan(self.N), -np.inf, self.N), axis=0)
        order = np.argsort(peak)[::-1]
        return [self.pairs[int(i)] for i in order[:k]]


def non_adiabaticity_profile(p: ModelParams, d: DisorderRealization | None,
                             theta_grid, n: int,
                             pair_set=None) -> NonAdiabaticityProfile:
    """O, Delta and N against every partner in pair_set (default: all m != n).

    Degenerate pairs (gap < GAP_FLOOR) at a grid point are excluded from
    the aggregate there and logged in the profile's exclusion records.
    """
    thetas = np.asarray(theta_grid, dtype=float)
    if not 1 <= n <= p.L:
        raise ValueError("level %r out of range 1..%d" % (n, p.L))
    pairs = (tuple(m for m in range(1, p.L + 1) if m != n)
             if pair_set is None else tuple(pair_set))
    if n in pairs:
        raise ValueError("pair set must not contain the reference level")
    cols = np.array(pairs) - 1
    nth, npairs = thetas.shape[0], len(pairs)
    e_n = np.empty(nth)
    e_m = np.empty((nth, npairs))
    O = np.empty((nth, npairs))
    delta = np.empty((nth, npairs))
    N = np.empty((nth, npairs))
    total = np.zeros(nth)
    excluded = []
    for i, th in enumerate(thetas):
        s = eigendecompose(build_hamiltonian(p, th, d), theta=th)
        dH = d_hamiltonian_d_theta(p, th)
        num = np.abs(s.states[:, cols].T @ dH.matvec(s.states[:, n - 1]))
        e_n[i] = s.energies[n - 1]
        e_m[i] = s.energies[cols]
        delta[i] = np.abs(e_m[i] - e_n[i])
        bad = delta[i] < GAP_FLOOR
        with np.errstate(divide="ignore", invalid="ignore"):
            O[i] = np.where(bad, np.nan, num / delta[i])
            N[i] = np.where(bad, np.nan, O[i] / delta[i])
        total[i] = np.where(bad, 0.0, N[i]).sum()
        for j in np.nonzero(bad)[0]:
            excluded.append((float(th), pairs[int(j)], float(delta[i, j])))
    return NonAdiabaticityProfile(thetas=thetas, n=n, pairs=pairs, e_n=e_n,
                                  e_m=e_m, O=O, delta=delta, N=N, total=total,
                                  excluded=excluded)


def _parabolic_vertex(x0, x1, x2, y0, y1, y2):
    # vertex of the parabola through three points; handles nonuniform grids
    den = (x1 - x0) * (y1 - y2) - (x1 - x2) * (y1 - y0)
    if den == 0.0:
        return x1
    num = (x1 - x0) ** 2 * (y1 - y2) - (x1 - x2) ** 2 * (y1 - y0)
    return x1 - 0.5 * num / den


def peak_positions(thetas, values) -> list:
    """Strict local maxima above median + 5*IQR, parabola-refined, sorted."""
    x = np.asarray(thetas, dtype=float)
    v = np.asarray(values, dtype=float)
    if x.shape != v.shape or x.ndim != 1:
        raise ValueError("thetas and values must be matching 1-d arrays")
    if x.shape[0] < 3:
        return []
    q25, med, q75 = np.percentile(v, [25.0, 50.0, 75.0])
    thr = med + 5.0 * (q75 - q25)
    out = []
    for i in range(1, x.shape[0] - 1):
        if v[i] > v[i - 1] and v[i] > v[i + 1] and v[i] > thr:
            out.append(_parabolic_vertex(x[i - 1], x[i], x[i + 1],
                                         v[i - 1], v[i], v[i + 1]))
    return sorted(out)


def find_naps(profile: NonAdiabaticityProfile, series=None) -> list:
    """Theta positions where the profile peaks above its own baseline.

    Works on the aggregate by default; pass a partner level via `series`
    to locate peaks of a single N_nm instead.
    """
    v = profile.total if series is None else profile.pair_series(series)
    v = np.where(np.isnan(v), 0.0, v)
    return peak_positions(profile.thetas, v)


def localization_length(W: float, V: float, E: float) -> float:
    """Weak-disorder localization length 24(4V^2 - E^2)/W^2.

    The band-edge singularity |E| -> 2V is outside the formula's
    validity and rejected; W=0 returns inf as the distinct clean-chain
    signal.
    """
    if V <= 0 or W < 0:
        raise ValueError("need V > 0 and W >= 0")
    if abs(E) >= 2.0 * V:
        raise ValueError("|E| >= 2V sits at/beyond the band edge")
    if W == 0.0:
        return math.inf
    return 24.0 * (4.0 * V * V - E * E) / (W * W)


TM_CHUNK = 1 << 16


def transfer_matrix_xi(V: float, W: float, E: float, n_sites: int,
                       seed: int) -> float:
    """Inverse Lyapunov exponent of the uniform-hopping disordered chain.

    Multiplies the 2x2 transfer matrices for psi_{k+1} =
    ((E - eps_k)/V) psi_k - psi_{k-1} with per-step renormalization, so
    the product never overflows; the summed log growth rate gives gamma
    and xi = 1/gamma. Serves as the independent check of
    localization_length.
    """
    if n_sites < 100000:
        raise ValueError("n_sites below 1e5 gives unusable estimates")
    rng = np.random.Generator(np.random.PCG64(seed))
    u, v = 1.0, 0.0
    logsum = 0.0
    left = int(n_sites)
    while left > 0:
        k = min(left, TM_CHUNK)
        eps = W * rng.uniform(-0.5, 0.5, k)
        ls, u, v = _kernels.lyapunov_accum(eps, E, V, u, v)
        logsum += ls
        left -= k
    if not math.isfinite(logsum):
        raise OverflowError("transfer-matrix product diverged")
    gamma = logsum / n_sites
    if gamma <= 0.0:
        return math.inf
    return 1.0 / gamma
