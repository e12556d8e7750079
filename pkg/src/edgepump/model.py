"""Chain Hamiltonian construction.

Open chain of L sites with quasiperiodically modulated nearest-neighbor
hopping and optional quenched on-site disorder:

    H = sum_n V_n (|n><n+1| + h.c.) + W sum_n xi_n |n><n|
    V_n = V * (1 + lam * cos(2*pi*alpha*n + theta)),   n = 1..L-1

Bond n couples sites (n, n+1); the modulation index is the 1-based bond
index. The modulation argument uses 2*pi*alpha*n, so one period of the
tuning phase theta is 2*pi regardless of alpha; a modulation written as
cos(pi*a*n + theta) is obtained by passing alpha = a/2. Disorder enters
only on the diagonal and is theta-independent.
"""

import math
from dataclasses import dataclass

import numpy as np

GOLDEN = (math.sqrt(5.0) + 1.0) / 2.0
TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class ModelParams:
    """Static chain parameters."""

    L: int
    V: float = 8.0 / 15.0
    lam: float = 0.6
    alpha: float = GOLDEN
    W: float = 0.0

    def __post_init__(self):
        if self.L < 2:
            raise ValueError("L must be >= 2, got %r" % (self.L,))
        if self.V <= 0:
            raise ValueError("V must be > 0, got %r" % (self.V,))
        if self.lam < 0:
            raise ValueError("lam must be >= 0, got %r" % (self.lam,))
        if self.W < 0:
            raise ValueError("W must be >= 0, got %r" % (self.W,))


@dataclass(frozen=True, eq=False)
class DisorderRealization:
    """One quenched draw of on-site disorder, xi_n in [-1/2, 1/2]."""

    xi: np.ndarray
    seed: int

    def __post_init__(self):
        xi = np.ascontiguousarray(self.xi, dtype=float)
        if xi.ndim != 1:
            raise ValueError("xi must be a 1-d sequence")
        if np.any(np.abs(xi) > 0.5):
            raise ValueError("xi entries must lie in [-1/2, 1/2]")
        xi.flags.writeable = False
        object.__setattr__(self, "xi", xi)


@dataclass(frozen=True, eq=False)
class TridiagonalOperator:
    """Real symmetric tridiagonal matrix: diagonal + off-diagonal bands."""

    diag: np.ndarray
    offdiag: np.ndarray

    def __post_init__(self):
        diag = np.ascontiguousarray(self.diag, dtype=float)
        offdiag = np.ascontiguousarray(self.offdiag, dtype=float)
        if diag.ndim != 1 or offdiag.ndim != 1:
            raise ValueError("diag and offdiag must be 1-d")
        if offdiag.shape[0] != diag.shape[0] - 1:
            raise ValueError("need len(offdiag) == len(diag) - 1, got %d and %d"
                             % (offdiag.shape[0], diag.shape[0]))
        diag.flags.writeable = False
        offdiag.flags.writeable = False
        object.__setattr__(self, "diag", diag)
        object.__setattr__(self, "offdiag", offdiag)

    @property
    def size(self):
        return self.diag.shape[0]

    def matvec(self, psi):
        out = self.diag * psi
        out[:-1] += self.offdiag * psi[1:]
        out[1:] += self.offdiag * psi[:-1]
        return out

    def to_dense(self):
        m = np.diag(self.diag)
        m += np.diag(self.offdiag, 1)
        m += np.diag(self.offdiag, -1)
        return m


def bond_hoppings(p: ModelParams, theta: float) -> np.ndarray:
    n = np.arange(1, p.L)
    return p.V * (1.0 + p.lam * np.cos(TWO_PI * p.alpha * n + theta))


def build_hamiltonian(p: ModelParams, theta: float,
                      d: DisorderRealization | None = None) -> TridiagonalOperator:
    """Hamiltonian at tuning phase theta, with optional quenched disorder."""
    if d is not None and d.xi.shape[0] != p.L:
        raise ValueError("disorder length %d does not match L=%d"
                         % (d.xi.shape[0], p.L))
    if d is None:
        diag = np.zeros(p.L)
    else:
        diag = p.W * d.xi
    return TridiagonalOperator(diag=diag, offdiag=bond_hoppings(p, theta))


def d_hamiltonian_d_theta(p: ModelParams, theta: float) -> TridiagonalOperator:
    """Analytic theta-derivative of the Hamiltonian (disorder drops out)."""
    n = np.arange(1, p.L)
    dod = -p.V * p.lam * np.sin(TWO_PI * p.alpha * n + theta)
    return TridiagonalOperator(diag=np.zeros(p.L), offdiag=dod)


def sample_disorder(p: ModelParams, seed: int) -> DisorderRealization:
    """Draw xi_n ~ U[-1/2, 1/2] from PCG64(seed); bit-stable across runs."""
    gen = np.random.Generator(np.random.PCG64(seed))
    xi = gen.uniform(-0.5, 0.5, p.L)
    return DisorderRealization(xi=xi, seed=int(seed))
