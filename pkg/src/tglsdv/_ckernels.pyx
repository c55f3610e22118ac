# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops. Signatures mirror ``_pykernels``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, NAN

cnp.import_array()


def hp_bands(Py_ssize_t T):
    cdef cnp.ndarray[double, ndim=1] d0 = np.zeros(T)
    cdef cnp.ndarray[double, ndim=1] d1 = np.zeros(T - 1)
    cdef cnp.ndarray[double, ndim=1] d2 = np.zeros(T - 2)
    cdef Py_ssize_t j
    # accumulate D''^T D'' row by row; each row of D'' is (1, -2, 1)
    for j in range(T - 2):
        d0[j] += 1.0
        d0[j + 1] += 4.0
        d0[j + 2] += 1.0
        d1[j] += -2.0
        d1[j + 1] += -2.0
        d2[j] += 1.0
    return d0, d1, d2


def hp_trend(double[::1] x, double lam):
    cdef Py_ssize_t T = x.shape[0]
    cdef Py_ssize_t i
    out = np.empty(T)
    cdef double[::1] tau = out
    if lam == 0.0:
        for i in range(T):
            tau[i] = x[i]
        return out
    b0, b1, b2 = hp_bands(T)
    cdef double[::1] a0 = b0, a1 = b1, a2 = b2
    cdef double[::1] dd = np.empty(T)
    cdef double[::1] l1 = np.zeros(T)
    cdef double[::1] l2 = np.zeros(T)
    cdef double[::1] z = np.empty(T)
    # LDL^T of I + lam * K'K with bandwidth 2; l1[i] = L[i, i-1], l2[i] = L[i, i-2]
    for i in range(T):
        if i >= 2:
            l2[i] = lam * a2[i - 2] / dd[i - 2]
        if i >= 1:
            l1[i] = lam * a1[i - 1]
            if i >= 2:
                l1[i] -= l2[i] * l1[i - 1] * dd[i - 2]
            l1[i] /= dd[i - 1]
        dd[i] = 1.0 + lam * a0[i]
        if i >= 1:
            dd[i] -= l1[i] * l1[i] * dd[i - 1]
        if i >= 2:
            dd[i] -= l2[i] * l2[i] * dd[i - 2]
    for i in range(T):
        z[i] = x[i]
        if i >= 1:
            z[i] -= l1[i] * z[i - 1]
        if i >= 2:
            z[i] -= l2[i] * z[i - 2]
    for i in range(T):
        z[i] /= dd[i]
    for i in range(T - 1, -1, -1):
        tau[i] = z[i]
        if i + 1 < T:
            tau[i] -= l1[i + 1] * tau[i + 1]
        if i + 2 < T:
            tau[i] -= l2[i + 2] * tau[i + 2]
    return out


def bspline_basis(double[::1] x, double[::1] knots, int degree):
    cdef Py_ssize_t m = x.shape[0]
    cdef Py_ssize_t nk = knots.shape[0]
    cdef Py_ssize_t nb = nk - degree - 1
    cdef int p = degree
    out = np.zeros((m, nb))
    cdef double[:, ::1] B = out
    cdef double[::1] N = np.empty(p + 1)
    cdef double[::1] left = np.empty(p + 1)
    cdef double[::1] right = np.empty(p + 1)
    cdef Py_ssize_t r, j, k, span, lo, hi, mid
    cdef double u, saved, temp
    for k in range(m):
        u = x[k]
        if u < knots[p] or u > knots[nb]:
            continue
        # last non-empty span is used for the right endpoint
        if u >= knots[nb]:
            span = nb - 1
            while span > p and knots[span] == knots[span + 1]:
                span -= 1
        else:
            lo = p
            hi = nb
            while hi - lo > 1:
                mid = (lo + hi) // 2
                if u < knots[mid]:
                    hi = mid
                else:
                    lo = mid
            span = lo
        N[0] = 1.0
        for j in range(1, p + 1):
            left[j] = u - knots[span + 1 - j]
            right[j] = knots[span + j] - u
            saved = 0.0
            for r in range(j):
                temp = N[r] / (right[r + 1] + left[j - r])
                N[r] = saved + right[r + 1] * temp
                saved = left[j - r] * temp
            N[j] = saved
        for j in range(p + 1):
            B[k, span - p + j] = N[j]
    return out


def subset_rss(double[:, ::1] G, double[::1] g, double yy,
               int[:, ::1] idx, int[::1] lengths):
    cdef Py_ssize_t ncomb = idx.shape[0]
    cdef Py_ssize_t width = idx.shape[1]
    out = np.empty(ncomb)
    cdef double[::1] rss = out
    cdef double[:, ::1] L = np.empty((width, width))
    cdef double[::1] b = np.empty(width)
    cdef Py_ssize_t c, i, j, q, m
    cdef double s, fit
    cdef bint ok
    for c in range(ncomb):
        m = lengths[c]
        ok = True
        # Cholesky of the selected principal submatrix
        for i in range(m):
            for j in range(i + 1):
                s = G[idx[c, i], idx[c, j]]
                for q in range(j):
                    s -= L[i, q] * L[j, q]
                if i == j:
                    if s <= 1e-13 * G[idx[c, i], idx[c, i]]:
                        ok = False
                        break
                    L[i, i] = sqrt(s)
                else:
                    L[i, j] = s / L[j, j]
            if not ok:
                break
        if not ok:
            rss[c] = NAN
            continue
        # rss = yy - g_S' G_SS^{-1} g_S = yy - |L^{-1} g_S|^2
        fit = 0.0
        for i in range(m):
            s = g[idx[c, i]]
            for q in range(i):
                s -= L[i, q] * b[q]
            b[i] = s / L[i, i]
            fit += b[i] * b[i]
        rss[c] = yy - fit
    return out
