"""Timing comparison of the compiled kernels against the python fallback.

Run:  python3 benchmarks/bench_kernels.py [--repeat N]

Imports both backend modules directly (bypassing the import-time
selection) so one process can time them side by side, and checks that
they agree to round-off on each workload before timing it.
"""

import argparse
import time

import numpy as np

from edgepump._kernels import _pyref

try:
    from edgepump._kernels import _native
except ImportError:
    _native = None

V, LAM, ALPHA = 8.0 / 15.0, 0.6, (np.sqrt(5.0) + 1.0) / 2.0
TWO_PI = 2.0 * np.pi


def _offd_rows(L, nsteps):
    n = np.arange(1, L)
    th = TWO_PI * 0.37 + np.arange(nsteps)[:, None] * 1e-4
    return V * (1.0 + LAM * np.cos(TWO_PI * ALPHA * n + th))


def bench_tql2(mod, L, repeat):
    rng = np.random.default_rng(7)
    diag = rng.normal(size=L)
    offd = V * (1.0 + LAM * np.cos(TWO_PI * ALPHA * np.arange(1, L)))
    best = np.inf
    for _ in range(repeat):
        d = diag.copy()
        z = np.eye(L)
        t0 = time.perf_counter()
        info = mod.tql2(d, offd, z)
        best = min(best, time.perf_counter() - t0)
        assert info == 0
    return best, d


def bench_cn(mod, L, nsteps, repeat):
    diag = np.zeros(L)
    offd = np.ascontiguousarray(_offd_rows(L, nsteps))
    psi0 = np.zeros(L, complex)
    psi0[0] = 1.0
    best = np.inf
    for _ in range(repeat):
        psi = psi0.copy()
        t0 = time.perf_counter()
        mod.cn_evolve(diag, offd, psi, 0.05)
        best = min(best, time.perf_counter() - t0)
    return best, psi


def bench_lyap(mod, n, repeat):
    rng = np.random.default_rng(11)
    eps = 0.5 * rng.uniform(-0.5, 0.5, n)
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = mod.lyapunov_accum(eps, 0.0, 1.0, 1.0, 0.0)
        best = min(best, time.perf_counter() - t0)
    return best, out[0]


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    mods = [("pyref", _pyref)]
    if _native is not None:
        mods.append(("native", _native))
    else:
        print("native extension not built; timing the fallback only")

    cases = [
        ("tql2 L=105", lambda m: bench_tql2(m, 105, args.repeat)),
        ("cn_evolve L=105 x 20000 steps",
         lambda m: bench_cn(m, 105, 20000, args.repeat)),
        ("lyapunov 1e6 sites", lambda m: bench_lyap(m, 1000000, args.repeat)),
    ]
    for label, fn in cases:
        row = {}
        check = {}
        for name, mod in mods:
            row[name], check[name] = fn(mod)
        if len(row) == 2:
            a, b = check["pyref"], check["native"]
            err = float(np.max(np.abs(np.asarray(a) - np.asarray(b))))
            speed = row["pyref"] / row["native"]
            print("%-32s pyref %8.4fs  native %8.4fs  x%-7.1f |diff| %.2e"
                  % (label, row["pyref"], row["native"], speed, err))
        else:
            print("%-32s pyref %8.4fs" % (label, row["pyref"]))


if __name__ == "__main__":
    main()
