"""Pure numpy/scipy versions of the compiled kernels."""

import numpy as np
from scipy import linalg


def hp_bands(T):
    d0 = np.zeros(T)
    d1 = np.zeros(T - 1)
    d2 = np.zeros(T - 2)
    for j in range(T - 2):
        d0[j:j + 3] += (1.0, 4.0, 1.0)
        d1[j:j + 2] += -2.0
        d2[j] += 1.0
    return d0, d1, d2


def hp_trend(x, lam):
    x = np.ascontiguousarray(x, dtype=float)
    if lam == 0.0:
        return x.copy()
    T = x.shape[0]
    d0, d1, d2 = hp_bands(T)
    # upper-form banded storage for solveh_banded
    ab = np.zeros((3, T))
    ab[0, 2:] = lam * d2
    ab[1, 1:] = lam * d1
    ab[2, :] = 1.0 + lam * d0
    return linalg.solveh_banded(ab, x)


def bspline_basis(x, knots, degree):
    x = np.asarray(x, dtype=float)
    t = np.asarray(knots, dtype=float)
    p = int(degree)
    nb = t.size - p - 1
    lo, hi = t[p], t[nb]
    # degree-0 indicators on half-open spans; the right endpoint goes to the
    # last non-empty span
    B = np.zeros((x.size, t.size - 1))
    for i in range(t.size - 1):
        if t[i] < t[i + 1]:
            B[:, i] = (x >= t[i]) & (x < t[i + 1])
    last = max(i for i in range(t.size - 1) if t[i] < t[i + 1])
    B[x == hi, :] = 0.0
    B[x == hi, last] = 1.0
    for k in range(1, p + 1):
        nxt = np.zeros((x.size, t.size - 1 - k))
        for i in range(t.size - 1 - k):
            d1 = t[i + k] - t[i]
            d2 = t[i + k + 1] - t[i + 1]
            if d1 > 0:
                nxt[:, i] += (x - t[i]) / d1 * B[:, i]
            if d2 > 0:
                nxt[:, i] += (t[i + k + 1] - x) / d2 * B[:, i + 1]
        B = nxt
    B[(x < lo) | (x > hi)] = 0.0
    return B


def subset_rss(G, g, yy, idx, lengths):
    out = np.empty(idx.shape[0])
    for c in range(idx.shape[0]):
        sel = idx[c, :lengths[c]]
        Gs = G[np.ix_(sel, sel)]
        try:
            L = np.linalg.cholesky(Gs)
        except np.linalg.LinAlgError:
            out[c] = np.nan
            continue
        if np.any(np.diag(L) ** 2 <= 1e-13 * np.diag(Gs)):
            out[c] = np.nan
            continue
        b = linalg.solve_triangular(L, g[sel], lower=True)
        out[c] = yy - b @ b
    return out
