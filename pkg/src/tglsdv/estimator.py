"""Two-groups LSDV estimation and its semiparametric, interaction and
time-varying-dummy extensions."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg, stats

from . import kernels
from .design import (
    add_interactions,
    add_timevarying_dummies,
    bspline_design,
    closed_form_ctc_inverse,
    country_means,
    ct_times,
    demean,
    group_loadings,
)
from .errors import CollinearityError, DegenerateGroupError, InsufficientDofError
from .preprocess import DesignSpec, RegressionFrame


@dataclass
class FitResult:
    """Estimates of one model fit.

    ``names``/``coef``/``cov`` cover the reported coefficients (intercept,
    lagged ``y``, slopes, SSH dummy or dummies). ``eta_tilde_hat`` holds the
    centered country effects in frame order.
    """

    model: str
    lag: int
    names: list
    coef: np.ndarray
    cov: np.ndarray
    eta_tilde_hat: np.ndarray
    eta_tilde_se: np.ndarray
    countries: list
    ssh: np.ndarray
    years: list
    rss: float
    n_obs: int
    k_params: int
    extras: dict = field(default_factory=dict)

    @property
    def dof(self) -> int:
        return self.n_obs - self.k_params

    @property
    def sigma2(self) -> float:
        return self.rss / self.dof

    @property
    def bic(self) -> float:
        N = self.n_obs
        return N * np.log(self.rss / N) + self.k_params * np.log(N)

    @property
    def se(self) -> np.ndarray:
        return np.sqrt(np.maximum(np.diag(self.cov), 0.0))

    @property
    def corr(self) -> np.ndarray:
        se = self.se
        with np.errstate(invalid="ignore", divide="ignore"):
            c = self.cov / np.outer(se, se)
        np.fill_diagonal(c, 1.0)
        return c

    @property
    def pvalues(self) -> np.ndarray:
        with np.errstate(invalid="ignore", divide="ignore"):
            z = self.coef / self.se
        return 2.0 * stats.norm.sf(np.abs(z))

    @property
    def s(self) -> int:
        return int(np.sum(self.ssh))

    def __getitem__(self, name) -> float:
        return float(self.coef[self.names.index(name)])

    def se_of(self, name) -> float:
        return float(self.se[self.names.index(name)])

    @property
    def rho_hat(self) -> float:
        return self["lag y"]

    @property
    def beta_hat(self) -> np.ndarray:
        return np.array([self[v] for v in self.extras.get("slopes", [])])

    @property
    def eta_g_hat(self) -> float:
        return self["Intercept"]

    @property
    def ssh_hat(self):
        if self.model == "timevary":
            return np.array([self[f"SSH {y}"] for y in self.years])
        return self["SSH"]

    @property
    def total_effects(self) -> np.ndarray:
        """``eta_g + SSH * 1_SSH + eta_tilde`` (static-dummy models)."""
        return self.eta_g_hat + self.ssh_hat * self.ssh + self.eta_tilde_hat

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "lag": self.lag,
            "names": list(self.names),
            "coef": [float(v) for v in self.coef],
            "se": [float(v) for v in self.se],
            "cov": [[float(v) for v in row] for row in self.cov],
            "corr": [[float(v) for v in row] for row in self.corr],
            "countries": list(self.countries),
            "ssh": [bool(v) for v in self.ssh],
            "eta_tilde": [float(v) for v in self.eta_tilde_hat],
            "eta_tilde_se": [float(v) for v in self.eta_tilde_se],
            "years": [int(y) for y in self.years],
            "rss": float(self.rss),
            "n_obs": int(self.n_obs),
            "k_params": int(self.k_params),
            "dof": int(self.dof),
            "sigma2": float(self.sigma2),
            "bic": float(self.bic),
            "extras": _jsonable(self.extras),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "FitResult":
        return cls(
            model=d["model"], lag=d["lag"], names=list(d["names"]),
            coef=np.array(d["coef"]), cov=np.array(d["cov"]),
            eta_tilde_hat=np.array(d["eta_tilde"]),
            eta_tilde_se=np.array(d["eta_tilde_se"]),
            countries=list(d["countries"]), ssh=np.array(d["ssh"], bool),
            years=list(d["years"]), rss=d["rss"], n_obs=d["n_obs"],
            k_params=d["k_params"], extras=d.get("extras", {}),
        )

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=1) + "\n"

    @classmethod
    def loads(cls, text: str) -> "FitResult":
        return cls.from_dict(json.loads(text))


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.integer, int)) and not isinstance(obj, bool):
        return int(obj)
    return obj


# ---------------------------------------------------------------- core algebra

def _check_rank(A, names):
    if A.shape[1] == 0:
        return
    _, R, piv = linalg.qr(A, mode="economic", pivoting=True)
    d = np.abs(np.diag(R))
    tol = max(A.shape) * np.finfo(float).eps * (d[0] if d.size else 0.0)
    rank = int(np.sum(d > max(tol, 1e-300)))
    if rank < A.shape[1]:
        raise CollinearityError([names[j] for j in sorted(piv[rank:])])


def _ols(y, A, names):
    """Least squares via QR; returns coefficients, residuals and (A'A)^{-1}."""
    _check_rank(A, names)
    if A.shape[1] == 0:
        return np.empty(0), y.copy(), np.empty((0, 0))
    Q, R = np.linalg.qr(A)
    coef = linalg.solve_triangular(R, Q.T @ y)
    Rinv = linalg.solve_triangular(R, np.eye(R.shape[0]))
    return coef, y - A @ coef, Rinv @ Rinv.T


def within_ols(y, A, n, T_eff, names):
    """OLS of within-demeaned ``y`` on within-demeaned ``A``.

    Returns ``(theta, residual_means, A_within_inverse_gram, rss)``.
    """
    yt = demean(y, n, T_eff)
    At = demean(A, n, T_eff)
    theta, resid, Q = _ols(yt, At, names)
    eta_bar = country_means(y - A @ theta, n, T_eff)
    return theta, eta_bar, Q, float(resid @ resid)


def fit_within(frame: RegressionFrame):
    """Within-group estimates of ``(rho, beta)`` and the per-country means of
    ``y - rho*y_lag - X beta``."""
    A = np.column_stack([frame.y_lag, frame.X])
    theta, eta_bar, _, _ = within_ols(frame.y, A, frame.n, frame.T_eff,
                                      ["lag y", *frame.x_names])
    return float(theta[0]), theta[1:], eta_bar


def recover_effects(residual_means, s: int):
    """Split per-country means into common intercept, SSH dummy and the
    within-group centered effects."""
    eta_bar = np.asarray(residual_means, dtype=float)
    n = eta_bar.size
    if not 0 < s < n:
        raise DegenerateGroupError(f"need 0 < s < n, got s={s}, n={n}")
    mean_a = eta_bar[:s].mean()
    mean_na = eta_bar[s:].mean()
    eta_tilde = np.concatenate([eta_bar[:s] - mean_a, eta_bar[s:] - mean_na])
    return float(mean_na), float(mean_a - mean_na), eta_tilde


def _full_effects_map(n, s, with_ssh=True):
    """Linear map from the identified effect vector to all ``n`` centered
    effects (the last member of each group is minus the sum of the rest)."""
    lead = 2 if with_ssh else 1
    R = group_loadings(n, s, with_ssh)
    L = R[:, lead:].copy()
    return L, lead


def covariance(A, n: int, s: int, T_eff: int, sigma2: float, Q=None) -> np.ndarray:
    """Covariance of ``(theta, eta_SSH)`` in the two-groups LSDV model with
    regressors ``A`` (partitioned form with the closed-form ``(C'C)^{-1}``).

    ``eta_SSH`` is ordered as intercept, SSH, then the identified centered
    effects. ``Q`` is the inverse Gram matrix of the within-demeaned ``A``.
    """
    A = np.asarray(A, dtype=float)
    if Q is None:
        At = demean(A, n, T_eff)
        Q = np.linalg.inv(At.T @ At)
    Ci = closed_form_ctc_inverse(n, s, T_eff)
    P = Ci @ ct_times(A, n, s, T_eff)
    PQ = P @ Q
    top = np.hstack([Q, -PQ.T])
    bottom = np.hstack([-PQ, Ci + PQ @ P.T])
    return sigma2 * np.vstack([top, bottom])


def _dof_check(N, k):
    if N <= k:
        raise InsufficientDofError(f"{N} observations for {k} parameters")


def _two_step_fit(frame, A, a_names, model, extras=None):
    """Within estimation followed by group-mean recovery of the effects."""
    n, s, T_eff = frame.n, frame.s, frame.T_eff
    if not 0 < s < n:
        raise DegenerateGroupError(f"need 0 < s < n, got s={s}, n={n}")
    N, p = frame.n_obs, A.shape[1]
    k = p + n
    _dof_check(N, k)
    theta, eta_bar, Q, rss = within_ols(frame.y, A, n, T_eff, a_names)
    eta_g, ssh, eta_tilde = recover_effects(eta_bar, s)
    V = covariance(A, n, s, T_eff, rss / (N - k), Q=Q)
    # reported: Intercept, theta..., SSH
    sel = [p] + list(range(p)) + [p + 1]
    names = ["Intercept", *a_names, "SSH"]
    coef = np.concatenate([[eta_g], theta, [ssh]])
    L, lead = _full_effects_map(n, s)
    Veta = V[p + lead:, p + lead:]
    eta_se = np.sqrt(np.maximum(np.sum((L @ Veta) * L, axis=1), 0.0))
    ex = {"slopes": [v for v in a_names if v != "lag y"]}
    ex.update(extras or {})
    return FitResult(model, frame.lag, names, coef, V[np.ix_(sel, sel)], eta_tilde,
                     eta_se, list(frame.countries), np.asarray(frame.ssh, bool),
                     list(frame.years), rss, N, k, ex)


def _joint_fit(frame, A, a_names, model, timevary=False, extras=None):
    """One OLS on the explicit design ``(A, dummy block)``."""
    n, s, T_eff = frame.n, frame.s, frame.T_eff
    if not 0 < s < n:
        raise DegenerateGroupError(f"need 0 < s < n, got s={s}, n={n}")
    R = group_loadings(n, s, with_ssh=not timevary)
    C = np.kron(R, np.ones((T_eff, 1)))
    blocks = [A]
    if timevary:
        blocks.append(frame.ssh_time)
        d_names = [f"SSH {y}" for y in frame.years]
    else:
        d_names = ["SSH"]
    lead = 1 if timevary else 2
    eff_names = [f"eta_tilde {c}" for c in frame.countries[:s - 1]] + \
                [f"eta_tilde {c}" for c in frame.countries[s:n - 1]]
    W = np.column_stack(blocks + [C])
    if timevary:
        w_names = [*a_names, *d_names, "Intercept", *eff_names]
    else:
        w_names = [*a_names, "Intercept", "SSH", *eff_names]
    N, k = W.shape
    _dof_check(N, k)
    coef, resid, Winv = _ols(frame.y, W, w_names)
    rss = float(resid @ resid)
    V = rss / (N - k) * Winv
    p = A.shape[1]
    if timevary:
        T_d = len(d_names)
        icpt = p + T_d
        sel = [icpt] + list(range(p)) + list(range(p, p + T_d))
        names = ["Intercept", *a_names, *d_names]
        eff0 = icpt + 1
    else:
        sel = [p] + list(range(p)) + [p + 1]
        names = ["Intercept", *a_names, "SSH"]
        eff0 = p + 2
    L, _ = _full_effects_map(n, s, with_ssh=not timevary)
    eta_tilde = L @ coef[eff0:]
    Veta = V[eff0:, eff0:]
    eta_se = np.sqrt(np.maximum(np.sum((L @ Veta) * L, axis=1), 0.0))
    ex = {"slopes": [v for v in a_names if v != "lag y" and not v.startswith("1_SSH")]}
    ex.update(extras or {})
    return FitResult(model, frame.lag, names, coef[sel], V[np.ix_(sel, sel)], eta_tilde,
                     eta_se, list(frame.countries), np.asarray(frame.ssh, bool),
                     list(frame.years), rss, N, k, ex)


# ---------------------------------------------------------------- model variants

def fit_baseline(frame: RegressionFrame) -> FitResult:
    A = np.column_stack([frame.y_lag, frame.X])
    return _two_step_fit(frame, A, ["lag y", *frame.x_names], "baseline")


def fit_interactions(frame: RegressionFrame) -> FitResult:
    """Joint OLS with ``1_SSH``-interacted lagged ``y`` and regressors.

    ``extras["totals"]`` maps each base coefficient to the SSH total
    ``base + interaction`` with its delta-method standard error.
    """
    fr = add_interactions(frame)
    a_names = ["lag y", *fr.x_names]
    A = np.column_stack([fr.y_lag, fr.X])
    fit = _joint_fit(fr, A, a_names, "interact")
    fit.extras["totals"] = {
        base: list(coefficient_sum(fit, base, f"1_SSH {base}"))
        for base in ["lag y", *frame.x_names]
    }
    return fit


def coefficient_sum(fit: FitResult, a: str, b: str) -> tuple:
    """``coef[a] + coef[b]`` with its delta-method standard error."""
    i, j = fit.names.index(a), fit.names.index(b)
    est = fit.coef[i] + fit.coef[j]
    var = fit.cov[i, i] + fit.cov[j, j] + 2.0 * fit.cov[i, j]
    return float(est), float(np.sqrt(max(var, 0.0)))


def fit_timevarying(frame: RegressionFrame) -> FitResult:
    fr = frame if frame.ssh_time is not None else add_timevarying_dummies(frame)
    A = np.column_stack([fr.y_lag, fr.X])
    return _joint_fit(fr, A, ["lag y", *fr.x_names], "timevary", timevary=True)


def _spline_block(x, k):
    basis = bspline_design(x, k)
    return basis, basis.design


def fit_semiparametric(frame: RegressionFrame, knot_grid=(0, 1, 3, 4, 5, 6, 7, 8, 9, 10),
                       spline_vars=None) -> FitResult:
    """Additive cubic B-spline model, knots chosen per variable by BIC.

    Every combination of interior-knot counts over ``knot_grid`` is scored by
    ``N ln(RSS/N) + k ln N``; ties go to the smallest total knot count, then
    the lexicographically smallest combination.
    """
    spline_vars = list(frame.x_names if spline_vars is None else spline_vars)
    n, T_eff, N = frame.n, frame.T_eff, frame.n_obs
    grid = sorted(set(int(k) for k in knot_grid))
    lin = [j for j, v in enumerate(frame.x_names) if v not in spline_vars]
    cols = [frame.y_lag] + [frame.X[:, j] for j in lin]
    blocks = {}
    pos = len(cols)
    for v in spline_vars:
        x = frame.X[:, frame.x_names.index(v)]
        for k in grid:
            _, D = _spline_block(x, k)
            blocks[v, k] = list(range(pos, pos + D.shape[1]))
            cols.extend(D.T)
            pos += D.shape[1]
    At = demean(np.column_stack(cols), n, T_eff)
    yt = demean(frame.y, n, T_eff)
    scale = np.sqrt(np.einsum("ij,ij->j", At, At))
    scale[scale == 0] = 1.0
    As = At / scale
    G = np.ascontiguousarray(As.T @ As)
    g = np.ascontiguousarray(As.T @ yt)
    combos = sorted(itertools.product(grid, repeat=len(spline_vars)),
                    key=lambda c: (sum(c), c))
    base = list(range(1 + len(lin)))
    sels = [base + [j for v, k in zip(spline_vars, c) for j in blocks[v, k]] for c in combos]
    width = max(len(sel) for sel in sels)
    idx = np.zeros((len(sels), width), dtype=np.int32)
    lengths = np.array([len(sel) for sel in sels], dtype=np.int32)
    for r, sel in enumerate(sels):
        idx[r, :len(sel)] = sel
    rss = kernels.subset_rss(G, g, float(yt @ yt), idx, lengths)
    kpar = lengths + n
    with np.errstate(invalid="ignore", divide="ignore"):
        bic = N * np.log(rss / N) + kpar * np.log(N)
    bic[~np.isfinite(bic) | (kpar >= N)] = np.inf
    best = int(np.argmin(bic))  # first minimum in tie-break order
    if not np.isfinite(bic[best]):
        raise CollinearityError(["all knot combinations"])
    chosen = dict(zip(spline_vars, combos[best]))

    a_cols = [frame.y_lag] + [frame.X[:, j] for j in lin]
    a_names = ["lag y"] + [frame.x_names[j] for j in lin]
    bases = {}
    for v in spline_vars:
        x = frame.X[:, frame.x_names.index(v)]
        basis, D = _spline_block(x, chosen[v])
        bases[v] = basis
        a_cols.extend(D.T)
        a_names.extend(f"{v}[b{j}]" for j in range(1, basis.n_basis))
    A = np.column_stack(a_cols)
    search = {"combos": [list(c) for c in combos], "bic": bic.tolist()}
    fit = _two_step_fit(frame, A, a_names, "semi",
                        extras={"knots": chosen, "knot_grid": grid})
    fit.extras["slopes"] = [frame.x_names[j] for j in lin]
    fit.extras["spline_knots"] = {v: bases[v].knots.tolist() for v in spline_vars}
    slopes = {}
    for v in spline_vars:
        x = frame.X[:, frame.x_names.index(v)]
        c = np.array([fit[f"{v}[b{j}]"] for j in range(1, bases[v].n_basis)])
        f = bases[v].design @ c
        slopes[v] = float(np.cov(f, x)[0, 1] / np.var(x, ddof=1))
    fit.extras["implied_slopes"] = slopes
    fit._search = search
    return fit


def spline_curve(fit: FitResult, variable: str, x) -> np.ndarray:
    """Fitted additive component of ``variable`` at ``x`` (first basis function
    is the reference level)."""
    from .design import SplineBasis
    t = np.array(fit.extras["spline_knots"][variable])
    basis = SplineBasis(3, t.size - 8, t, np.empty((0, t.size - 4)))
    B = basis.evaluate(x)
    c = np.array([fit[f"{variable}[b{j}]"] for j in range(1, basis.n_basis)])
    return B[:, 1:] @ c


def fit_two_groups_lsdv(frame: RegressionFrame, spec: DesignSpec | None = None) -> FitResult:
    spec = spec or DesignSpec(lag=frame.lag)
    if spec.model == "baseline":
        return fit_baseline(frame)
    if spec.model == "semi":
        return fit_semiparametric(frame, spec.knot_grid,
                                  [v for v in frame.x_names if v != "trend"])
    if spec.model == "interact":
        return fit_interactions(frame)
    return fit_timevarying(frame)
