"""Time evolution along a linear theta schedule.

The Schrodinger equation i d/dt psi = H(theta(t)) psi is integrated
with Crank-Nicolson steps, (1 + i dt/2 H_mid) psi' = (1 - i dt/2 H_mid) psi,
with the Hamiltonian evaluated at the step's midpoint phase. Each step
is one O(L) complex tridiagonal solve and is unitary up to round-off;
the eigenbasis never enters the propagation itself.
"""

import math
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .model import ModelParams, DisorderRealization, TWO_PI
from .spectra import eigendecompose, edge_state_index
from .model import build_hamiltonian

MAX_CHUNK = 8192        # CN steps per kernel call; bounds scratch memory
NORM_ABORT = 1e-8       # norm drift that aborts a run


class NoEdgeStateError(RuntimeError):
    pass


class PropagationError(RuntimeError):
    pass


@dataclass(frozen=True)
class ThetaSchedule:
    """Linear ramp theta(t) = theta_start + (theta_end - theta_start) t/T."""

    theta_start: float
    theta_end: float
    T: float

    def __post_init__(self):
        if self.T <= 0:
            raise ValueError("T must be > 0")

    @property
    def span(self):
        return self.theta_end - self.theta_start

    def theta(self, t):
        return self.theta_start + self.span * t / self.T

    @classmethod
    def one_cycle(cls, theta_start: float, T: float, margin: float = 0.3):
        """Full pump cycle plus a margin clearing the second level crossing."""
        return cls(theta_start, theta_start + TWO_PI + margin, T)


@dataclass(eq=False)
class Trajectory:
    times: np.ndarray
    psis: np.ndarray      # (nsamples, L) complex
    thetas: np.ndarray
    norms: np.ndarray
    xbars: np.ndarray
    dt: float
    schedule: ThetaSchedule


def mean_position(psi) -> float:
    """Sum_i x_i |psi_i|^2 with sites numbered 1..L."""
    a2 = np.abs(np.asarray(psi)) ** 2
    if abs(a2.sum() - 1.0) > 1e-8:
        raise ValueError("state not normalized")
    return float(np.arange(1, a2.shape[0] + 1) @ a2)


def initial_edge_state(p: ModelParams, d: DisorderRealization | None,
                       schedule: ThetaSchedule, branch: str = "positive"):
    """Edge eigenstate at theta_start, as a complex vector."""
    s = eigendecompose(build_hamiltonian(p, schedule.theta_start, d),
                       theta=schedule.theta_start)
    idx = edge_state_index(s, branch)
    if idx is None:
        raise NoEdgeStateError(
            "no %s-branch edge state at theta_start=%.6g (L=%d, W=%g)"
            % (branch, schedule.theta_start, p.L, p.W))
    return s.states[:, idx - 1].astype(complex)


def _sample_steps(nsteps: int, samples: int):
    if samples < 2:
        raise ValueError("need at least 2 samples")
    ks = np.unique(np.rint(np.linspace(0, nsteps, samples)).astype(int))
    return ks


def evolve(p: ModelParams, d: DisorderRealization | None,
           schedule: ThetaSchedule, psi0, dt: float = 0.05,
           samples: int = 129) -> Trajectory:
    """Crank-Nicolson integration of one trajectory.

    The step count is round(T/dt) so the last step lands exactly on T;
    samples are taken at the nearest step boundaries of a uniform grid,
    always including t=0 and t=T. Aborts if the norm drifts by more
    than 1e-8 (CN should hold it to round-off).
    """
    psi0 = np.asarray(psi0, dtype=complex)
    if psi0.shape != (p.L,):
        raise ValueError("psi0 has shape %r, expected (%d,)" % (psi0.shape, p.L))
    if abs(np.vdot(psi0, psi0).real - 1.0) > 1e-8:
        raise ValueError("psi0 not normalized")
    # max|E| estimate (Gershgorin) gates the step size
    emax = p.W * 0.5 + 2.0 * p.V * (1.0 + p.lam)
    if dt * emax >= 0.1:
        raise ValueError("dt=%g too large: max|E|*dt = %.3g >= 0.1"
                         % (dt, dt * emax))

    T = schedule.T
    nsteps = max(2, int(round(T / dt)))
    dt = T / nsteps
    diag = p.W * d.xi if d is not None else np.zeros(p.L)
    diag = np.ascontiguousarray(diag, dtype=float)
    bond_phase = TWO_PI * p.alpha * np.arange(1, p.L)
    span = schedule.span

    ks = _sample_steps(nsteps, samples)
    nsamp = ks.shape[0]
    times = ks * dt
    thetas = schedule.theta_start + span * ks * dt / T
    psis = np.empty((nsamp, p.L), dtype=complex)
    norms = np.empty(nsamp)
    xbars = np.empty(nsamp)
    x = np.arange(1, p.L + 1)

    psi = psi0.copy()

    def record(i):
        psis[i] = psi
        a2 = np.abs(psi) ** 2
        norms[i] = math.sqrt(a2.sum())
        xbars[i] = x @ a2
        if abs(norms[i] - 1.0) > NORM_ABORT:
            raise PropagationError(
                "norm drifted to %.12g at t=%.6g (dt=%g, L=%d)"
                % (norms[i], times[i], dt, p.L))

    record(0)
    for i in range(1, nsamp):
        k0, k1 = int(ks[i - 1]), int(ks[i])
        while k0 < k1:
            kc = min(k1, k0 + MAX_CHUNK)
            karr = np.arange(k0, kc)
            thm = schedule.theta_start + span * (karr + 0.5) * dt / T
            offd = p.V * (1.0 + p.lam * np.cos(bond_phase + thm[:, None]))
            _kernels.cn_evolve(diag, np.ascontiguousarray(offd), psi, dt)
            k0 = kc
        record(i)
    return Trajectory(times=times, psis=psis, thetas=thetas, norms=norms,
                      xbars=xbars, dt=dt, schedule=schedule)


def final_occupations(p: ModelParams, d: DisorderRealization | None,
                      traj: Trajectory):
    """|<psi_n(theta_end)|psi(T)>|^2 for all levels, 0-based array."""
    s = eigendecompose(build_hamiltonian(p, traj.schedule.theta_end, d),
                       theta=traj.schedule.theta_end)
    amps = s.states.T @ traj.psis[-1]
    return np.abs(amps) ** 2


def converged_evolve(p: ModelParams, d: DisorderRealization | None,
                     schedule: ThetaSchedule, psi0, samples: int = 129,
                     tol: float = 1e-6, max_halvings: int = 10):
    """Halve dt until the final occupations move by less than tol.

    Starts from dt = min(0.05, T/200000). Returns (trajectory, report)
    where the report records the accepted dt and the last delta.
    """
    dt = min(0.05, schedule.T / 200000.0)
    traj = evolve(p, d, schedule, psi0, dt=dt, samples=samples)
    rho = final_occupations(p, d, traj)
    delta = math.inf
    for _ in range(max_halvings):
        traj2 = evolve(p, d, schedule, psi0, dt=dt / 2, samples=samples)
        rho2 = final_occupations(p, d, traj2)
        delta = float(np.max(np.abs(rho2 - rho)))
        if delta < tol:
            return traj2, {"dt": traj2.dt, "converged": True, "delta": delta}
        dt, traj, rho = dt / 2, traj2, rho2
    return traj, {"dt": traj.dt, "converged": False, "delta": delta}
