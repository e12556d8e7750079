import numpy as np
import pytest
from scipy.linalg import expm

from edgepump import (ModelParams, NoEdgeStateError, ThetaSchedule,
                      build_hamiltonian, converged_evolve, edge_slot,
                      eigendecompose, evolve, final_occupations,
                      initial_edge_state, mean_position, sample_disorder)
from edgepump.harness import slot_state, theta_start_policy


def test_schedule_basics():
    sc = ThetaSchedule(0.5, 2.5, 10.0)
    assert sc.span == pytest.approx(2.0)
    assert sc.theta(0.0) == pytest.approx(0.5)
    assert sc.theta(10.0) == pytest.approx(2.5)
    oc = ThetaSchedule.one_cycle(0.1, 100.0)
    assert oc.span == pytest.approx(2 * np.pi + 0.3)
    with pytest.raises(ValueError):
        ThetaSchedule(0.0, 1.0, 0.0)


def test_mean_position_trivials():
    e = np.zeros(9, complex)
    e[4] = 1.0
    assert mean_position(e) == pytest.approx(5.0)
    assert mean_position(np.ones(7) / np.sqrt(7)) == pytest.approx(4.0)
    with pytest.raises(ValueError):
        mean_position(np.ones(5))


def _oracle_evolve(p, d, sched, psi0, dt):
    """Exact midpoint-Hamiltonian stepping via the dense exponential."""
    nsteps = max(2, int(round(sched.T / dt)))
    dt = sched.T / nsteps
    psi = psi0.astype(complex)
    for k in range(nsteps):
        th = sched.theta_start + sched.span * (k + 0.5) * dt / sched.T
        h = build_hamiltonian(p, th, d).to_dense()
        psi = expm(-1j * dt * h) @ psi
    return psi


def test_cn_matches_dense_exponential():
    p = ModelParams(L=4, W=0.2)
    d = sample_disorder(p, 9)
    sched = ThetaSchedule(0.3, 1.7, 3.0)
    s = eigendecompose(build_hamiltonian(p, sched.theta_start, d))
    psi0 = s.states[:, 0].astype(complex)
    traj = evolve(p, d, sched, psi0, dt=1e-3, samples=2)
    ref = _oracle_evolve(p, d, sched, psi0, 1e-3)
    fid = abs(np.vdot(ref, traj.psis[-1])) ** 2
    assert fid > 1 - 1e-8


def test_norm_is_conserved(clean42):
    th0 = theta_start_policy(clean42)
    sched = ThetaSchedule.one_cycle(th0, 50.0)
    traj = evolve(clean42, None, sched, slot_state(clean42, None, th0),
                  dt=0.05, samples=17)
    assert np.max(np.abs(traj.norms - 1.0)) < 1e-10


def test_time_reversal():
    # H is real, so conjugation inverts each CN step exactly: running the
    # reversed schedule on conj(psi_final) must return conj(psi0)
    p = ModelParams(L=6)
    sched = ThetaSchedule(0.2, 1.4, 4.0)
    s = eigendecompose(build_hamiltonian(p, 0.2))
    psi0 = s.states[:, 2].astype(complex)
    fwd = evolve(p, None, sched, psi0, dt=0.01, samples=2)
    back = ThetaSchedule(sched.theta_end, sched.theta_start, sched.T)
    rev = evolve(p, None, back, np.conj(fwd.psis[-1]), dt=0.01, samples=2)
    assert np.max(np.abs(np.conj(rev.psis[-1]) - psi0)) < 1e-10


def test_samples_cover_endpoints():
    p = ModelParams(L=5)
    sched = ThetaSchedule(0.0, 1.0, 2.0)
    psi0 = np.zeros(5, complex)
    psi0[0] = 1.0
    traj = evolve(p, None, sched, psi0, dt=0.01, samples=7)
    assert traj.times[0] == 0.0
    assert traj.times[-1] == pytest.approx(2.0)
    assert np.all(np.diff(traj.times) > 0)
    assert traj.thetas[0] == pytest.approx(0.0)
    assert traj.thetas[-1] == pytest.approx(1.0)


def test_initial_edge_state(clean42):
    th0 = theta_start_policy(clean42)
    sched = ThetaSchedule.one_cycle(th0, 100.0)
    psi = initial_edge_state(clean42, None, sched)
    ref = slot_state(clean42, None, th0)
    assert np.allclose(psi, ref, atol=1e-12)
    # starts localized at the left end
    assert mean_position(psi) < clean42.L / 4


def test_initial_edge_state_missing():
    p = ModelParams(L=8, lam=0.0)
    with pytest.raises(NoEdgeStateError):
        initial_edge_state(p, None, ThetaSchedule.one_cycle(0.0, 10.0))


def test_step_size_gate(clean42):
    sched = ThetaSchedule.one_cycle(0.0, 10.0)
    psi0 = np.zeros(42, complex)
    psi0[0] = 1.0
    with pytest.raises(ValueError, match="dt"):
        evolve(clean42, None, sched, psi0, dt=1.0)


def test_psi0_validation(clean42):
    sched = ThetaSchedule.one_cycle(0.0, 10.0)
    with pytest.raises(ValueError):
        evolve(clean42, None, sched, np.zeros(41, complex))
    with pytest.raises(ValueError):
        evolve(clean42, None, sched, np.ones(42, complex))


def test_final_occupations_complete():
    p = ModelParams(L=10)
    sched = ThetaSchedule(0.1, 0.9, 5.0)
    s = eigendecompose(build_hamiltonian(p, 0.1))
    traj = evolve(p, None, sched, s.states[:, 4].astype(complex),
                  dt=0.02, samples=2)
    rho = final_occupations(p, None, traj)
    assert rho.shape == (10,)
    assert rho.sum() == pytest.approx(1.0, abs=1e-10)


def test_converged_evolve_small_case():
    p = ModelParams(L=6)
    sched = ThetaSchedule(0.0, 2.0, 8.0)
    s = eigendecompose(build_hamiltonian(p, 0.0))
    traj, report = converged_evolve(p, None, sched, s.states[:, 1].astype(complex),
                                    samples=5, tol=1e-6)
    assert report["converged"]
    assert report["delta"] < 1e-6
    assert report["dt"] == pytest.approx(traj.dt)


def test_edge_slot_pump_starts_left(clean105):
    th0 = theta_start_policy(clean105)
    psi = slot_state(clean105, None, th0)
    assert mean_position(psi) < clean105.L / 4
    assert edge_slot(105) == 65
