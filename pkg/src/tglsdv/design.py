"""Design matrices: the two-group dummy block, within projection, cubic
B-spline bases, interaction columns and the time-varying dummy block."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy.linalg import block_diag

from . import kernels
from .errors import DegenerateGroupError, DegenerateRangeError
from .preprocess import RegressionFrame


def _check_groups(n, s):
    if not 0 < s < n:
        raise DegenerateGroupError(f"need 0 < s < n, got s={s}, n={n}")


def group_loadings(n: int, s: int, with_ssh: bool = True) -> np.ndarray:
    """Country-level rows of the dummy design; ``C = kron(R, ones(T_eff))``.

    Columns: common intercept, SSH indicator (if ``with_ssh``), then the
    centered SSH effects for countries ``0..s-2`` and the centered non-SSH
    effects for countries ``s..n-2``. The last member of each group loads
    ``-1`` on its group's effect columns.
    """
    _check_groups(n, s)
    lead = 2 if with_ssh else 1
    R = np.zeros((n, n - 2 + lead))
    R[:, 0] = 1.0
    if with_ssh:
        R[:s, 1] = 1.0
    for j in range(s - 1):
        R[j, lead + j] = 1.0
        R[s - 1, lead + j] = -1.0
    off = lead + s - 1
    for j in range(n - s - 1):
        R[s + j, off + j] = 1.0
        R[n - 1, off + j] = -1.0
    return R


def _z_blocks(n, s):
    Z1 = np.array([[n, s], [s, s]], dtype=float)
    Z2 = np.eye(s - 1) + np.ones((s - 1, s - 1))
    Z3 = np.eye(n - s - 1) + np.ones((n - s - 1, n - s - 1))
    return Z1, Z2, Z3


@dataclass(frozen=True)
class TwoGroupDesign:
    C: np.ndarray
    Z1: np.ndarray
    Z2: np.ndarray
    Z3: np.ndarray
    n: int
    s: int
    T_eff: int

    @property
    def ctc(self) -> np.ndarray:
        return self.T_eff * block_diag(self.Z1, self.Z2, self.Z3)

    @property
    def ctc_inv(self) -> np.ndarray:
        return closed_form_ctc_inverse(self.n, self.s, self.T_eff)

    def projector(self) -> np.ndarray:
        """``M = I - C (C'C)^{-1} C'`` built from the closed-form inverse."""
        C = self.C
        return np.eye(C.shape[0]) - C @ self.ctc_inv @ C.T


def build_two_group_design(n: int, s: int, T_eff: int) -> TwoGroupDesign:
    _check_groups(n, s)
    if T_eff < 1:
        raise ValueError(f"T_eff must be positive, got {T_eff}")
    R = group_loadings(n, s)
    C = np.kron(R, np.ones((T_eff, 1)))
    return TwoGroupDesign(C, *_z_blocks(n, s), n=n, s=s, T_eff=T_eff)


def closed_form_ctc_inverse(n: int, s: int, T_eff: int) -> np.ndarray:
    _check_groups(n, s)
    Z1i = np.array([[1.0, -1.0], [-1.0, n / s]]) / (n - s)
    Z2i = (s * np.eye(s - 1) - np.ones((s - 1, s - 1))) / s
    Z3i = ((n - s) * np.eye(n - s - 1) - np.ones((n - s - 1, n - s - 1))) / (n - s)
    return block_diag(Z1i, Z2i, Z3i) / T_eff


def ct_times(A, n: int, s: int, T_eff: int) -> np.ndarray:
    """``C' A`` from per-country column sums, without forming ``C``."""
    A = np.asarray(A, dtype=float)
    S = A.reshape((n, T_eff) + A.shape[1:]).sum(axis=1)
    return group_loadings(n, s).T @ S


def demean(v, n: int, T_eff: int) -> np.ndarray:
    """Subtract per-country time means from a stacked vector or matrix."""
    v = np.asarray(v, dtype=float)
    w = v.reshape((n, T_eff) + v.shape[1:])
    return (w - w.mean(axis=1, keepdims=True)).reshape(v.shape)


def country_means(v, n: int, T_eff: int) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    return v.reshape((n, T_eff) + v.shape[1:]).mean(axis=1)


@dataclass(frozen=True)
class SplineBasis:
    """Clamped cubic B-spline basis with equidistant interior knots.

    ``basis`` holds every basis function; ``design`` drops the first column so
    the remaining ones are identified next to an intercept.
    """

    degree: int
    interior_knots: int
    knots: np.ndarray
    basis: np.ndarray

    @property
    def n_basis(self) -> int:
        return self.basis.shape[1]

    @property
    def design(self) -> np.ndarray:
        return self.basis[:, 1:]

    @property
    def bounds(self) -> tuple:
        return float(self.knots[0]), float(self.knots[-1])

    def evaluate(self, x) -> np.ndarray:
        x = np.clip(np.ascontiguousarray(x, dtype=float), *self.bounds)
        return kernels.bspline_basis(x, self.knots, self.degree)


def knot_vector(lo: float, hi: float, interior_knots: int, degree: int = 3) -> np.ndarray:
    inner = lo + (hi - lo) * np.arange(1, interior_knots + 1) / (interior_knots + 1)
    return np.concatenate([np.full(degree + 1, lo), inner, np.full(degree + 1, hi)])


def bspline_design(x, interior_knots: int, degree: int = 3) -> SplineBasis:
    x = np.ascontiguousarray(x, dtype=float)
    if interior_knots < 0:
        raise ValueError("interior_knots must be non-negative")
    if not np.all(np.isfinite(x)):
        raise ValueError("x must be finite")
    lo, hi = float(x.min()), float(x.max())
    if not lo < hi:
        raise DegenerateRangeError("spline variable is constant")
    t = knot_vector(lo, hi, interior_knots, degree)
    return SplineBasis(degree, interior_knots, t, kernels.bspline_basis(x, t, degree))


def add_interactions(frame: RegressionFrame) -> RegressionFrame:
    """Append ``1_SSH * v`` for the lagged dependent variable and each base
    regressor."""
    ind = frame.ssh_rows.astype(float)
    cols = [frame.y_lag * ind] + [frame.X[:, j] * ind for j in range(frame.X.shape[1])]
    names = ["1_SSH lag y"] + [f"1_SSH {v}" for v in frame.x_names]
    return frame.with_columns(np.column_stack(cols), names)


def timevarying_block(n: int, s: int, T_eff: int) -> np.ndarray:
    ind = (np.arange(n) < s).astype(float)
    return np.kron(ind[:, None], np.eye(T_eff))


def add_timevarying_dummies(frame: RegressionFrame) -> RegressionFrame:
    """Attach one SSH dummy per period in place of the static SSH column."""
    _check_groups(frame.n, frame.s)
    return replace(frame, ssh_time=timevarying_block(frame.n, frame.s, frame.T_eff))


def timevarying_design(n: int, s: int, T_eff: int) -> np.ndarray:
    """``(iota_SSH kron I, C)`` with the ``n-1`` column companion design."""
    C = np.kron(group_loadings(n, s, with_ssh=False), np.ones((T_eff, 1)))
    return np.column_stack([timevarying_block(n, s, T_eff), C])
