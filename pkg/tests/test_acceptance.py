"""Acceptance gate. Each criterion prints one line

    CRITERION k: PASS - detail
    CRITERION k: FAIL - detail

and then asserts. Thresholds are fixed up front; criteria that the
implementation does not reach stay red with their measured values in
the detail, they are never loosened. The start phase comes from the
pinned 256-point policy, all pumps use dt=0.05 and cycle margin 0.3,
and extremum legs search within +-10% of their anchor pump time.
"""

import time

import numpy as np
import pytest
from scipy.linalg import expm

from edgepump import (LzsParams, ModelParams, RunConfig, ThetaSchedule,
                      TridiagonalOperator, build_hamiltonian,
                      coupling_overlap, d_hamiltonian_d_theta, edge_slot,
                      eigendecompose, evolve, final_occupations, find_naps,
                      localization_length, lzs_evolve,
                      non_adiabaticity_profile, occupations, sample_disorder,
                      transfer_matrix_xi)
from edgepump.harness import (_golden_max, _golden_min, disorder_ensemble,
                              near_edge_anticrossings, pump_final_rho,
                              regime_a_scaling, slot_state, t_star_vs_L,
                              theta_start_policy)
from edgepump.lzs import transition_localization

DT = 0.05
MARGIN = 0.3
L_SET = (21, 34, 42, 55, 89)

# trajectories produced while criteria run; criterion 8 audits their norms
_DRIFTS = []


def _report(k, ok, detail, capsys):
    line = "CRITERION %d: %s - %s" % (k, "PASS" if ok else "FAIL", detail)
    with capsys.disabled():
        print("\n" + line, flush=True)
    assert ok, line


@pytest.fixture(scope="session")
def theta0_42():
    return theta_start_policy(ModelParams(L=42))


@pytest.fixture(scope="session")
def traj1300(theta0_42):
    p = ModelParams(L=42)
    sched = ThetaSchedule.one_cycle(theta0_42, 1300.0, MARGIN)
    traj = evolve(p, None, sched, slot_state(p, None, theta0_42),
                  dt=DT, samples=401)
    _DRIFTS.append(("L=42 T=1300", float(np.max(np.abs(traj.norms - 1.0)))))
    return traj


@pytest.fixture(scope="session")
def seed6_run():
    p = ModelParams(L=105, W=0.08)
    d = sample_disorder(p, 6)
    th0 = theta_start_policy(p, d)
    sched = ThetaSchedule.one_cycle(th0, 10000.0, MARGIN)
    traj = evolve(p, d, sched, slot_state(p, d, th0), dt=DT, samples=33)
    _DRIFTS.append(("L=105 seed 6 T=10000",
                    float(np.max(np.abs(traj.norms - 1.0)))))
    rho = final_occupations(p, d, traj)
    return {"p": p, "d": d, "theta0": th0, "rho_edge": float(rho[64])}


def test_criterion_1(capsys):
    t0 = time.perf_counter()
    runs = {T: lzs_evolve(LzsParams(g=0.4, A=4.0, T=T), dt=5e-4)
            for T in (20.0, 21.0)}
    elapsed = time.perf_counter() - t0
    r20, r21 = runs[20.0].rho[-1], runs[21.0].rho[-1]
    contrast = abs(r20 - r21)
    ratios = {T: transition_localization(s)[1] / transition_localization(s)[0]
              for T, s in runs.items()}
    ok = (contrast > 0.3 and all(r < 0.1 for r in ratios.values())
          and elapsed < 1.0)
    _report(1, ok,
            "rho(20)=%.4f rho(21)=%.4f contrast=%.4f (>0.3), "
            "off-crossing/crossing derivative ratios %.4f/%.4f (<0.1), "
            "runtime %.2fs (<1s)"
            % (r20, r21, contrast, ratios[20.0], ratios[21.0], elapsed),
            capsys)


def _nearest_extremum(p, theta0, grid, kind, anchor):
    """(T_refined, rho_refined) for the local extremum closest to anchor."""
    rho = np.array([pump_final_rho(p, None, theta0, MARGIN, float(T), DT,
                                   (edge_slot(p.L),))[0] for T in grid])
    idx = []
    for i in range(1, grid.shape[0] - 1):
        if kind == "max" and rho[i] > rho[i - 1] and rho[i] > rho[i + 1]:
            idx.append(i)
        if kind == "min" and rho[i] < rho[i - 1] and rho[i] < rho[i + 1]:
            idx.append(i)
    if not idx:
        j = int(np.argmax(rho) if kind == "max" else np.argmin(rho))
        return float(grid[j]), float(rho[j]), False
    i = min(idx, key=lambda j: abs(grid[j] - anchor))
    f = lambda T: pump_final_rho(p, None, theta0, MARGIN, T, DT,
                                 (edge_slot(p.L),))[0]
    refine = _golden_max if kind == "max" else _golden_min
    t, r = refine(f, float(grid[i - 1]), float(grid[i + 1]),
                  xtol=0.02 * float(grid[i]))
    return float(t), float(r), True


def test_criterion_2(theta0_42, capsys):
    p = ModelParams(L=42)
    legs = (
        (1300.0, "max", np.arange(1170.0, 1431.0, 26.0), 0.9, ">="),
        (1750.0, "min", np.arange(1575.0, 1926.0, 25.0), 0.2, "<="),
        (9500.0, "max", np.arange(8550.0, 10451.0, 100.0), 0.95, ">="),
    )
    parts, ok = [], True
    for anchor, kind, grid, thr, sense in legs:
        t, r, found = _nearest_extremum(p, theta0_42, grid, kind, anchor)
        good = (r >= thr) if sense == ">=" else (r <= thr)
        good &= found
        ok &= good
        parts.append("T~%g: nearest %s at T=%.0f rho26=%.4f (need %s%g)%s"
                     % (anchor, kind, t, r, sense, thr,
                        "" if found else " [no extremum in window]"))
    _report(2, ok, "; ".join(parts), capsys)


def test_criterion_3(traj1300, capsys):
    p = ModelParams(L=42)
    occ = occupations(traj1300, p, None)
    pair = occ.rho[:, 25] + occ.rho[:, 26]
    i = int(np.argmin(pair))
    # companion diagnostic: how concentrated the state stays on its two
    # dominant instantaneous levels, whatever their sorted labels are
    top2 = float(np.sort(occ.rho, axis=1)[:, -2:].sum(axis=1).min())
    ok = bool(np.all(pair > 0.99))
    _report(3, ok,
            "min over T=1300 run of rho26+rho27 = %.4f at theta=%.3f "
            "(need >0.99 throughout); label-free top-2 concentration "
            "min = %.4f" % (pair[i], occ.thetas[i], top2), capsys)


def test_criterion_4(theta0_42, capsys):
    p = ModelParams(L=42)
    grid = np.linspace(theta0_42, theta0_42 + 2 * np.pi + MARGIN, 2048)
    prof = non_adiabaticity_profile(p, None, grid, 26, pair_set=(27,))
    naps = find_naps(prof)
    ok = len(naps) == 2
    _report(4, ok, "N_26,27 peaks over one cycle at [%s] (need exactly 2)"
            % ", ".join("%.3f" % x for x in naps), capsys)


def test_criterion_5(capsys):
    sc = t_star_vs_L(RunConfig(L=42, dt=DT), L_SET)
    table = " ".join("T*(%d)=%.0f" % (L, sc.t_star[L])
                     for L in sorted(sc.t_star))
    ok = sc.r2 > 0.98 and sc.slope > 0 and not sc.excluded
    _report(5, ok, "%s; linear fit slope=%.2f R2=%.4f (need R2>0.98, "
            "slope>0)" % (table, sc.slope, sc.r2), capsys)


def test_criterion_6(capsys):
    sc = regime_a_scaling(L_SET)
    ok = abs(sc["loglog_slope"] + 0.5) <= 0.15
    _report(6, ok,
            "dominant-pair N at the localized landmark: log-log slope "
            "%.3f vs -0.5 +- 0.15 (R2=%.3f)"
            % (sc["loglog_slope"], sc["r2"]), capsys)


def test_criterion_7(seed6_run, capsys):
    # short-chain leg: ensemble median near the clean optimum
    cfg = RunConfig(L=42, W=0.08, dt=DT)
    medians = {}
    for T in (8600.0, 8900.0, 9100.0, 9300.0):
        ens = disorder_ensemble(cfg, seeds=tuple(range(20)), T=T,
                                anticrossings=False)
        assert not ens.failures, ens.failures
        medians[T] = ens.median
    t_best = max(medians, key=medians.get)
    leg_a = medians[t_best] > 0.8

    # long-chain leg: pinned seed 6 breakdown
    r = seed6_run
    leg_b1 = r["rho_edge"] < 0.5
    span = 2 * np.pi + MARGIN
    acs6 = near_edge_anticrossings(r["p"], r["d"], r["theta0"],
                                   r["theta0"] + span)
    pc = ModelParams(L=105)
    th0c = theta_start_policy(pc)
    acsc = near_edge_anticrossings(pc, None, th0c, th0c + span)
    detach = edge_slot(105) + 1
    clean_gap = min(a.gap for a in acsc if a.pair == (detach, detach + 1))
    min_gap = min(a.gap for a in acs6)
    squeeze = min_gap / clean_gap
    leg_b2 = squeeze < 0.1
    top = max(acs6, key=lambda a: a.n_value)
    leg_b3 = top.theta - r["theta0"] > np.pi

    ok = leg_a and leg_b1 and leg_b2 and leg_b3
    _report(7, ok,
            "L=42 ensemble median(final rho26) max %.3f at T=%.0f "
            "(need >0.8); L=105 seed 6: rho65(T=1e4)=%.3f (need <0.5), "
            "gap squeeze %.2f%% of clean %.4g (need <10%%), max-N "
            "anticrossing at theta-theta0=%.3f (need >pi)"
            % (medians[t_best], t_best, r["rho_edge"], 100 * squeeze,
               clean_gap, top.theta - r["theta0"]), capsys)


def test_criterion_8(seed6_run, traj1300, capsys):
    parts, ok = [], True

    # norm drift on the acceptance trajectories plus a pump at the
    # clean optimum
    p42 = ModelParams(L=42)
    th0 = theta_start_policy(p42)
    sched = ThetaSchedule.one_cycle(th0, 9100.0, MARGIN)
    traj = evolve(p42, None, sched, slot_state(p42, None, th0),
                  dt=DT, samples=33)
    _DRIFTS.append(("L=42 T=9100", float(np.max(np.abs(traj.norms - 1.0)))))
    worst = max(_DRIFTS, key=lambda kv: kv[1])
    drift_ok = worst[1] < 1e-10
    ok &= drift_ok
    parts.append("norm drift %.1e on %s (<1e-10)" % (worst[1], worst[0]))

    # CN against the dense exponential on a 4-site chain
    p4 = ModelParams(L=4, W=0.2)
    d4 = sample_disorder(p4, 9)
    sc4 = ThetaSchedule(0.3, 1.7, 3.0)
    psi0 = eigendecompose(build_hamiltonian(p4, 0.3, d4)).states[:, 0] \
        .astype(complex)
    tr4 = evolve(p4, d4, sc4, psi0, dt=1e-3, samples=2)
    ref = psi0.copy()
    nst = int(round(3.0 / 1e-3))
    for k in range(nst):
        th = 0.3 + (1.7 - 0.3) * (k + 0.5) / nst
        ref = expm(-1j * (3.0 / nst)
                   * build_hamiltonian(p4, th, d4).to_dense()) @ ref
    fid = abs(np.vdot(ref, tr4.psis[-1])) ** 2
    fid_ok = fid > 1 - 1e-8
    ok &= fid_ok
    parts.append("CN fidelity 1-%.1e (>1-1e-8)" % max(1 - fid, 1e-17))

    # eigensolver against the dense oracle
    gen = np.random.Generator(np.random.PCG64(123))
    dev = 0.0
    for _ in range(20):
        n = int(gen.integers(2, 60))
        h = TridiagonalOperator(gen.normal(size=n), gen.normal(size=n - 1))
        s = eigendecompose(h)
        dev = max(dev, float(np.max(np.abs(
            s.energies - np.linalg.eigvalsh(h.to_dense())))))
    eig_ok = dev < 1e-9
    ok &= eig_ok
    parts.append("eigensolver dev %.1e (<1e-9)" % dev)

    # Hellmann-Feynman coupling against moving the eigenvector
    th, h = 0.7, 1e-5
    s = eigendecompose(build_hamiltonian(p42, th))
    dH = d_hamiltonian_d_theta(p42, th)
    sp = eigendecompose(build_hamiltonian(p42, th + h))
    sm = eigendecompose(build_hamiltonian(p42, th - h))
    rel = 0.0
    for n, m in ((10, 11), (26, 27), (5, 30)):
        vp, vm, v0 = sp.states[:, m - 1], sm.states[:, m - 1], \
            s.states[:, m - 1]
        vp = vp if vp @ v0 > 0 else -vp
        vm = vm if vm @ v0 > 0 else -vm
        fd = abs(s.states[:, n - 1] @ ((vp - vm) / (2 * h)))
        hf = coupling_overlap(s, dH, n, m)
        rel = max(rel, abs(hf - fd) / fd)
    hf_ok = rel < 1e-4
    ok &= hf_ok
    parts.append("coupling FD rel dev %.1e (<1e-4)" % rel)

    # weak-disorder localization length against the transfer matrix
    xi_tm = transfer_matrix_xi(1.0, 0.5, 0.0, 2_000_000, 4)
    xi_f = localization_length(0.5, 1.0, 0.0)
    tm_rel = abs(xi_tm - xi_f) / xi_f
    tm_ok = tm_rel < 0.25
    ok &= tm_ok
    parts.append("xi formula %.0f vs transfer matrix %.0f, rel %.2f "
                 "(<0.25)" % (xi_f, xi_tm, tm_rel))

    _report(8, ok, "; ".join(parts), capsys)
