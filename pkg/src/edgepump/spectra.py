"""Instantaneous eigendecomposition, edge-state identification, and
band diagrams over the tuning phase.

Level indices in the public API are 1-based in ascending energy order
(matching the site convention x_i = 1..L); array storage is 0-based.
"""

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .model import ModelParams, DisorderRealization, TridiagonalOperator, \
    build_hamiltonian

EDGE_IPR_FACTOR = 5.0  # a state counts as localized when ipr > 5/L


class EigensolverError(RuntimeError):
    pass


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Full decomposition at one phase: ascending energies, orthonormal
    gauge-fixed eigenvectors as columns of `states`."""

    energies: np.ndarray
    states: np.ndarray
    theta: float | None = None

    @property
    def size(self):
        return self.energies.shape[0]


def eigendecompose(h: TridiagonalOperator, theta: float | None = None) -> Spectrum:
    """Eigendecomposition via the in-repo implicit-shift QL kernel.

    Gauge: each eigenvector's largest-magnitude component is made
    positive, with magnitude ties broken toward the lowest site index
    (argmax returns the first maximum).
    """
    n = h.size
    d = h.diag.copy()
    e = h.offdiag.copy() if n > 1 else np.zeros(0)
    z = np.eye(n)
    info = _kernels.tql2(d, e, z)
    if info:
        raise EigensolverError(
            "QL iteration failed for eigenvalue %d of an L=%d matrix "
            "(|diag|max=%.3g, |offdiag|max=%.3g)"
            % (info, n, np.abs(h.diag).max(), np.abs(h.offdiag).max() if n > 1 else 0.0))
    # sign gauge, column by column
    pick = np.argmax(np.abs(z), axis=0)
    flip = z[pick, np.arange(n)] < 0
    z[:, flip] *= -1.0
    return Spectrum(energies=d, states=z, theta=theta)


def ipr(state) -> float:
    """Inverse participation ratio sum |c_n|^4 of a normalized state."""
    a2 = np.abs(np.asarray(state)) ** 2
    norm = a2.sum()
    if abs(norm - 1.0) > 1e-8:
        raise ValueError("state not normalized: |psi|^2 = %.12g" % norm)
    return float(np.sum(a2 * a2))


def _branch_gap(energies, localized, branch):
    """Widest spacing between consecutive bulk energies whose midpoint
    lies on the requested sign side. Returns (lo, hi) or None."""
    be = energies[~localized]
    if be.shape[0] < 2:
        return None
    spacing = np.diff(be)
    mids = 0.5 * (be[1:] + be[:-1])
    side = mids > 0 if branch == "positive" else mids < 0
    if not side.any():
        return None
    j = int(np.argmax(np.where(side, spacing, -np.inf)))
    return float(be[j]), float(be[j + 1])


def edge_state_index(s: Spectrum, branch: str = "positive") -> int | None:
    """1-based index of the mid-gap edge state on the requested branch.

    The bulk gap is estimated from the spectrum's own delocalized
    states (ipr <= 5/L); candidates are the localized states inside it.
    Both chain ends can host an in-gap state with nearly equal ipr, so
    left-localized candidates (mean position < L/2) are preferred and
    the right end is used only when no left candidate exists. Returns
    None when the gap holds no localized state ("no edge state").
    """
    if branch not in ("positive", "negative"):
        raise ValueError("branch must be 'positive' or 'negative'")
    n = s.size
    iprs = np.sum(s.states ** 4, axis=0)
    localized = iprs > EDGE_IPR_FACTOR / n
    gap = _branch_gap(s.energies, localized, branch)
    if gap is None:
        return None
    lo, hi = gap
    inside = (s.energies > lo) & (s.energies < hi) & localized
    if not inside.any():
        return None
    x = np.arange(1, n + 1)
    xbar = x @ s.states ** 2
    left = inside & (xbar < n / 2)
    pool = left if left.any() else inside
    return int(np.argmax(np.where(pool, iprs, -1.0))) + 1


@dataclass(frozen=True, eq=False)
class BandDiagram:
    """Sorted energy tracks over a theta grid, with per-state ipr and
    edge flags (localized AND inside the clean bulk gap)."""

    thetas: np.ndarray
    energies: np.ndarray   # (ntheta, L)
    iprs: np.ndarray       # (ntheta, L)
    edge_flags: np.ndarray  # (ntheta, L) bool


def band_diagram(p: ModelParams, d: DisorderRealization | None,
                 theta_grid) -> BandDiagram:
    thetas = np.asarray(theta_grid, dtype=float)
    if thetas.ndim != 1 or thetas.shape[0] < 2:
        raise ValueError("theta_grid needs at least 2 points")
    L = p.L
    energies = np.empty((thetas.shape[0], L))
    iprs = np.empty_like(energies)
    flags = np.zeros(energies.shape, dtype=bool)
    disordered = d is not None and p.W > 0
    for i, th in enumerate(thetas):
        s = eigendecompose(build_hamiltonian(p, th, d), theta=th)
        energies[i] = s.energies
        iprs[i] = np.sum(s.states ** 4, axis=0)
        # gap bounds come from the clean chain at the same phase
        if disordered:
            sc = eigendecompose(build_hamiltonian(p, th, None), theta=th)
            c_ipr = np.sum(sc.states ** 4, axis=0)
            c_en, c_loc = sc.energies, c_ipr > EDGE_IPR_FACTOR / L
        else:
            c_en, c_loc = s.energies, iprs[i] > EDGE_IPR_FACTOR / L
        loc = iprs[i] > EDGE_IPR_FACTOR / L
        for branch in ("positive", "negative"):
            gap = _branch_gap(c_en, c_loc, branch)
            if gap is None:
                continue
            lo, hi = gap
            flags[i] |= loc & (energies[i] > lo) & (energies[i] < hi)
    return BandDiagram(thetas=thetas, energies=energies, iprs=iprs,
                       edge_flags=flags)
