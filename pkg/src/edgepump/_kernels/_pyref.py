"""Pure-python reference kernels.

Same signatures and semantics as the compiled `_native` module. Used as
the fallback when the extension is missing or when EDGEPUMP_FORCE_PYREF
is set. The tridiagonal solves and QL sweeps are plain python loops, so
this backend is one to two orders of magnitude slower; results agree
with the native kernels to machine precision.
"""

import math

import numpy as np

BACKEND = "pyref"

_EPS = 2.0 ** -52


def tql2(d, e, z):
    """Eigendecomposition of a real symmetric tridiagonal matrix.

    Implicit-shift QL iteration (EISPACK tql2 lineage). d holds the
    diagonal on entry and the ascending eigenvalues on exit; e holds the
    L-1 subdiagonal entries and is not modified; z must be the identity
    on entry and holds the eigenvectors as columns on exit (column k
    pairs with d[k]). Returns 0 on success, or the 1-based index of the
    first eigenvalue that failed to converge within 30 iterations.
    """
    n = d.shape[0]
    if n == 1:
        return 0
    ee = np.empty(n)
    ee[: n - 1] = e[: n - 1]
    ee[n - 1] = 0.0
    f = 0.0
    tst1 = 0.0
    for l in range(n):
        j = 0
        h = abs(d[l]) + abs(ee[l])
        if tst1 < h:
            tst1 = h
        m = l
        while m < n:
            if tst1 + abs(ee[m]) == tst1:
                break
            m += 1
        if m > l:
            while True:
                j += 1
                if j > 30:
                    return l + 1
                g = d[l]
                p = (d[l + 1] - g) / (2.0 * ee[l])
                r = math.hypot(p, 1.0)
                rs = r if p >= 0 else -r
                d[l] = ee[l] / (p + rs)
                d[l + 1] = ee[l] * (p + rs)
                dl1 = d[l + 1]
                h = g - d[l]
                d[l + 2:] -= h
                f += h
                # implicit QL sweep from m down to l
                p = d[m]
                c = 1.0
                c2 = c
                c3 = c
                el1 = ee[l + 1]
                s = 0.0
                s2 = 0.0
                for i in range(m - 1, l - 1, -1):
                    c3 = c2
                    c2 = c
                    s2 = s
                    g = c * ee[i]
                    h = c * p
                    r = math.hypot(p, ee[i])
                    ee[i + 1] = s * r
                    s = ee[i] / r
                    c = p / r
                    p = c * d[i] - s * g
                    d[i + 1] = h + s * (c * g + s * d[i])
                    t = z[:, i + 1].copy()
                    z[:, i + 1] = s * z[:, i] + c * t
                    z[:, i] = c * z[:, i] - s * t
                p = -s * s2 * c3 * el1 * ee[l] / dl1
                ee[l] = s * p
                d[l] = c * p
                if tst1 + abs(ee[l]) <= tst1:
                    break
        d[l] += f
    # reorder ascending, carrying vectors along
    for i in range(n - 1):
        k = i
        p = d[i]
        for jj in range(i + 1, n):
            if d[jj] < p:
                k = jj
                p = d[jj]
        if k != i:
            d[k] = d[i]
            d[i] = p
            tmp = z[:, i].copy()
            z[:, i] = z[:, k]
            z[:, k] = tmp
    return 0


def cn_evolve(diag, offd, psi, dt):
    """Advance psi through one Crank-Nicolson step per row of offd.

    diag is the constant real diagonal, offd has shape (nsteps, L-1)
    with one hopping row per step (the Hamiltonian at that step's
    midpoint), psi is complex and updated in place. Each step solves
    (1 + i dt/2 H) psi' = (1 - i dt/2 H) psi with a Thomas sweep.
    """
    nsteps, lm1 = offd.shape
    L = lm1 + 1
    zh = 0.5j * dt
    dlo = 1.0 - zh * diag
    dhi = 1.0 + zh * diag
    cp = np.empty(L, complex)
    dp = np.empty(L, complex)
    rhs = np.empty(L, complex)
    for k in range(nsteps):
        b = offd[k]
        zb = zh * b
        rhs[:] = dlo * psi
        rhs[:-1] -= zb * psi[1:]
        rhs[1:] -= zb * psi[:-1]
        # forward elimination
        cp[0] = zb[0] / dhi[0]
        dp[0] = rhs[0] / dhi[0]
        for i in range(1, L - 1):
            mden = dhi[i] - zb[i - 1] * cp[i - 1]
            cp[i] = zb[i] / mden
            dp[i] = (rhs[i] - zb[i - 1] * dp[i - 1]) / mden
        mden = dhi[L - 1] - zb[L - 2] * cp[L - 2]
        dp[L - 1] = (rhs[L - 1] - zb[L - 2] * dp[L - 2]) / mden
        # back substitution
        psi[L - 1] = dp[L - 1]
        for i in range(L - 2, -1, -1):
            psi[i] = dp[i] - cp[i] * psi[i + 1]
    return None


def lyapunov_accum(eps, energy, hop, u, v):
    """Accumulate the transfer-matrix log-norm over one disorder chunk.

    Recurrence x_{k+1} = ((energy - eps[k]) / hop) x_k - x_{k-1} with
    (u, v) = (x_k, x_{k-1}); the pair is renormalized every step and
    the log of the scale factor summed. Returns (logsum, u, v).
    """
    logsum = 0.0
    for k in range(eps.shape[0]):
        a = (energy - eps[k]) / hop
        u, v = a * u - v, u
        r = math.hypot(u, v)
        logsum += math.log(r)
        u /= r
        v /= r
    return logsum, u, v
