# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: QL tridiagonal eigensolver, Crank-Nicolson
stepping, and transfer-matrix accumulation. Mirrors _pyref exactly."""

import numpy as np

from libc.math cimport fabs, hypot, log

BACKEND = "native"


def tql2(double[::1] d, double[::1] e, double[:, ::1] z):
    """See _pyref.tql2: implicit-shift QL with eigenvectors in columns."""
    cdef Py_ssize_t n = d.shape[0]
    if n == 1:
        return 0
    cdef double[::1] ee = np.empty(n)
    cdef Py_ssize_t l, m, i, k, jj, row
    cdef int j
    cdef double f, tst1, h, g, p, r, rs, dl1, c, c2, c3, el1, s, s2, t

    for i in range(n - 1):
        ee[i] = e[i]
    ee[n - 1] = 0.0
    f = 0.0
    tst1 = 0.0
    for l in range(n):
        j = 0
        h = fabs(d[l]) + fabs(ee[l])
        if tst1 < h:
            tst1 = h
        m = l
        while m < n:
            if tst1 + fabs(ee[m]) == tst1:
                break
            m += 1
        if m > l:
            while True:
                j += 1
                if j > 30:
                    return l + 1
                g = d[l]
                p = (d[l + 1] - g) / (2.0 * ee[l])
                r = hypot(p, 1.0)
                rs = r if p >= 0 else -r
                d[l] = ee[l] / (p + rs)
                d[l + 1] = ee[l] * (p + rs)
                dl1 = d[l + 1]
                h = g - d[l]
                for i in range(l + 2, n):
                    d[i] -= h
                f += h
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
                    r = hypot(p, ee[i])
                    ee[i + 1] = s * r
                    s = ee[i] / r
                    c = p / r
                    p = c * d[i] - s * g
                    d[i + 1] = h + s * (c * g + s * d[i])
                    for row in range(n):
                        t = z[row, i + 1]
                        z[row, i + 1] = s * z[row, i] + c * t
                        z[row, i] = c * z[row, i] - s * t
                p = -s * s2 * c3 * el1 * ee[l] / dl1
                ee[l] = s * p
                d[l] = c * p
                if tst1 + fabs(ee[l]) <= tst1:
                    break
        d[l] += f
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
            for row in range(n):
                t = z[row, i]
                z[row, i] = z[row, k]
                z[row, k] = t
    return 0


def cn_evolve(double[::1] diag, double[:, ::1] offd,
              double complex[::1] psi, double dt):
    """See _pyref.cn_evolve: one Crank-Nicolson step per offd row."""
    cdef Py_ssize_t nsteps = offd.shape[0]
    cdef Py_ssize_t L = offd.shape[1] + 1
    cdef double complex zh = 0.5j * dt
    cdef double complex[::1] dlo = np.empty(L, complex)
    cdef double complex[::1] dhi = np.empty(L, complex)
    cdef double complex[::1] cp = np.empty(L, complex)
    cdef double complex[::1] dp = np.empty(L, complex)
    cdef double complex[::1] rhs = np.empty(L, complex)
    cdef Py_ssize_t k, i
    cdef double complex zb_im1, zb_i, mden

    for i in range(L):
        dlo[i] = 1.0 - zh * diag[i]
        dhi[i] = 1.0 + zh * diag[i]
    for k in range(nsteps):
        rhs[0] = dlo[0] * psi[0] - zh * offd[k, 0] * psi[1]
        for i in range(1, L - 1):
            rhs[i] = (dlo[i] * psi[i]
                      - zh * offd[k, i - 1] * psi[i - 1]
                      - zh * offd[k, i] * psi[i + 1])
        rhs[L - 1] = dlo[L - 1] * psi[L - 1] - zh * offd[k, L - 2] * psi[L - 2]
        zb_i = zh * offd[k, 0]
        cp[0] = zb_i / dhi[0]
        dp[0] = rhs[0] / dhi[0]
        for i in range(1, L - 1):
            zb_im1 = zh * offd[k, i - 1]
            zb_i = zh * offd[k, i]
            mden = dhi[i] - zb_im1 * cp[i - 1]
            cp[i] = zb_i / mden
            dp[i] = (rhs[i] - zb_im1 * dp[i - 1]) / mden
        zb_im1 = zh * offd[k, L - 2]
        mden = dhi[L - 1] - zb_im1 * cp[L - 2]
        dp[L - 1] = (rhs[L - 1] - zb_im1 * dp[L - 2]) / mden
        psi[L - 1] = dp[L - 1]
        for i in range(L - 2, -1, -1):
            psi[i] = dp[i] - cp[i] * psi[i + 1]
    return None


def lyapunov_accum(double[::1] eps, double energy, double hop,
                   double u, double v):
    """See _pyref.lyapunov_accum."""
    cdef double logsum = 0.0
    cdef double a, r, unew
    cdef Py_ssize_t k
    for k in range(eps.shape[0]):
        a = (energy - eps[k]) / hop
        unew = a * u - v
        v = u
        u = unew
        r = hypot(u, v)
        logsum += log(r)
        u /= r
        v /= r
    return logsum, u, v
