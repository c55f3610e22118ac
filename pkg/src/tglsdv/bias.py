"""Dynamic-panel (Nickell) bias of the within / two-groups LSDV estimator:
the classical fixed-T approximation and a seeded Monte Carlo."""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import SeriesTooShortError, UnstableDGPError
from .estimator import fit_baseline, fit_timevarying
from .preprocess import RegressionFrame


def nickell_bias_approx(rho: float, T: int) -> float:
    """Large-n limit of ``rho_hat - rho`` for the within estimator of a pure
    AR(1) panel with ``T`` periods per unit in the regression.

    Evaluated as ``-(1 + rho) g / q`` with polynomials ``g`` and ``q`` in
    ``rho`` from which the common ``1 - rho`` factor has been cancelled, so
    the expression stays exact as ``rho -> 1`` (limit ``-3 / (T + 1)``).
    """
    T = int(T)
    if T < 3:
        raise SeriesTooShortError(f"need T >= 3, got {T}")
    j = np.arange(T - 1)
    # g = (1 - (1 - rho^T) / (T (1 - rho))) / (1 - rho)
    g_coef = (T - 1 - j) / T
    # (T - 1) - 2 rho g = (1 - rho) q ; q has cumulative-sum coefficients
    p_coef = np.concatenate([[T - 1.0], -2.0 * g_coef])
    q_coef = np.cumsum(p_coef)[:-1]
    g = np.polynomial.polynomial.polyval(rho, g_coef)
    q = np.polynomial.polynomial.polyval(rho, q_coef)
    return float(-(1.0 + rho) * g / q)


@dataclass(frozen=True)
class DGP:
    """Simulation design for ``y_it = eta_g + rho y_i,t-1 + x_it'beta
    + SSH_t 1_SSH,i + eta_tilde_i + nu_it``.

    ``T`` counts all periods including the initial one, so fits use ``T - 1``.
    ``ssh`` is a scalar or a path with one value per regression period;
    ``eta_tilde`` is drawn with standard deviation ``sigma_eta`` and centered
    within each group. Regressors are iid normal with means ``x_mean`` and
    standard deviations ``x_sd``. ``y`` starts from its stationary law.
    """

    rho: float = 0.9
    beta: tuple = (-0.01, 0.03, -0.015)
    ssh: float | tuple = -0.15
    eta_g: float = 0.5
    sigma_eta: float = 0.1
    sigma_nu: float = 0.01
    x_mean: tuple = (0.0, 0.0, 0.0)
    x_sd: tuple = (1.0, 1.0, 1.0)
    n: int = 81
    s: int = 18
    T: int = 48
    x_names: tuple = ("lnn", "lnsk", "lnattain")

    @property
    def time_varying(self) -> bool:
        return np.ndim(self.ssh) > 0

    def ssh_path(self) -> np.ndarray:
        if self.time_varying:
            path = np.asarray(self.ssh, dtype=float)
            if path.size != self.T - 1:
                raise ValueError(f"SSH path needs {self.T - 1} values")
            return path
        return np.full(self.T - 1, float(self.ssh))

    def truth(self) -> dict:
        truth = {"Intercept": self.eta_g, "lag y": self.rho}
        truth.update(zip(self.x_names, self.beta))
        if self.time_varying:
            truth.update((f"SSH {y}", v) for y, v in zip(self.years(), self.ssh_path()))
        else:
            truth["SSH"] = float(self.ssh)
        return truth

    def years(self) -> tuple:
        return tuple(range(1961, 1960 + self.T))


def simulate_frame(dgp: DGP, rng: np.random.Generator) -> RegressionFrame:
    if not abs(dgp.rho) < 1:
        raise UnstableDGPError(f"|rho| must be < 1, got {dgp.rho}")
    n, s, T = dgp.n, dgp.s, dgp.T
    K = len(dgp.beta)
    beta = np.asarray(dgp.beta, dtype=float)
    mu_x = np.broadcast_to(np.asarray(dgp.x_mean, float), (K,))
    sd_x = np.broadcast_to(np.asarray(dgp.x_sd, float), (K,))
    ind = (np.arange(n) < s).astype(float)
    eta = rng.normal(0.0, dgp.sigma_eta, n)
    eta[:s] -= eta[:s].mean()
    eta[s:] -= eta[s:].mean()
    path = dgp.ssh_path()
    x = mu_x + sd_x * rng.standard_normal((n, T, K))
    nu = dgp.sigma_nu * rng.standard_normal((n, T))
    Y = np.empty((n, T))
    level = dgp.eta_g + path[0] * ind + eta + beta @ mu_x
    sd0 = np.sqrt((np.sum((beta * sd_x) ** 2) + dgp.sigma_nu ** 2) / (1 - dgp.rho ** 2))
    Y[:, 0] = level / (1 - dgp.rho) + sd0 * rng.standard_normal(n)
    for t in range(1, T):
        Y[:, t] = (dgp.eta_g + path[t - 1] * ind + eta + dgp.rho * Y[:, t - 1]
                   + x[:, t] @ beta + nu[:, t])
    return RegressionFrame(
        y=Y[:, 1:].ravel(), y_lag=Y[:, :-1].ravel(),
        X=x[:, 1:].reshape(n * (T - 1), K), x_names=tuple(dgp.x_names[:K]),
        countries=tuple(f"C{i:03d}" for i in range(n)), ssh=ind.astype(bool),
        years=dgp.years(), lag=1,
    )


@dataclass
class BiasReport:
    rho_true: float
    T: int
    n: int
    analytic_rho_bias: float
    mc_bias: dict
    replications: int
    seed: int
    mean_estimate: dict = field(default_factory=dict)
    truth: dict = field(default_factory=dict)
    model: str = "baseline"

    def claim_check(self, names=None, threshold: float = 1e-3) -> dict:
        """Whether every ``|bias|`` in ``names`` stays below ``threshold`` even
        at the upper end of its 95% Monte Carlo interval."""
        names = list(names if names is not None else self.mc_bias)
        upper = {k: abs(self.mc_bias[k][0]) + 1.96 * self.mc_bias[k][1] for k in names}
        return {"threshold": threshold, "upper_abs_bias": upper,
                "confirmed": all(v < threshold for v in upper.values())}

    def to_dict(self) -> dict:
        return {
            "model": self.model, "rho_true": self.rho_true, "T": self.T, "n": self.n,
            "analytic_rho_bias": self.analytic_rho_bias,
            "replications": self.replications, "seed": self.seed,
            "truth": self.truth,
            "mean_estimate": self.mean_estimate,
            "mc_bias": {k: {"bias": b, "mc_se": se} for k, (b, se) in self.mc_bias.items()},
        }

    def render(self, beta_names=None) -> str:
        lines = [f"Monte Carlo bias ({self.model}), rho={self.rho_true}, T={self.T}, "
                 f"n={self.n}, reps={self.replications}, seed={self.seed}",
                 f"Nickell approximation for rho (T-1={self.T - 1} periods): "
                 f"{self.analytic_rho_bias:.6f}",
                 f"{'coefficient':<14}{'truth':>12}{'mean bias':>14}{'|bias|':>12}{'MC se':>12}"]
        for k, (b, se) in self.mc_bias.items():
            lines.append(f"{k:<14}{self.truth[k]:>12.6f}{b:>14.3e}{abs(b):>12.3e}{se:>12.3e}")
        if beta_names:
            chk = self.claim_check(beta_names)
            verdict = "confirmed" if chk["confirmed"] else "not confirmed"
            lines.append(f"slope biases below {chk['threshold']:g} (95% MC upper bound): "
                         f"{verdict}")
        return "\n".join(lines) + "\n"


def _one_rep(dgp, seed_seq, model, names):
    rng = np.random.default_rng(seed_seq)
    frame = simulate_frame(dgp, rng)
    fit = fit_timevarying(frame) if model == "timevary" else fit_baseline(frame)
    return np.array([fit[k] for k in names])


def monte_carlo_bias(dgp: DGP, reps: int = 1000, seed: int = 42,
                     model: str | None = None, n_jobs: int = 1) -> BiasReport:
    """Simulate ``reps`` panels and report mean estimation errors.

    Replication ``r`` draws from the ``r``-th child of
    ``SeedSequence(seed)``, so results do not depend on ``n_jobs``.
    """
    if reps < 200:
        raise ValueError(f"need at least 200 replications, got {reps}")
    if not abs(dgp.rho) < 1:
        raise UnstableDGPError(f"|rho| must be < 1, got {dgp.rho}")
    model = model or ("timevary" if dgp.time_varying else "baseline")
    truth = dgp.truth()
    names = list(truth)
    children = np.random.SeedSequence(seed).spawn(reps)
    if n_jobs > 1:
        with ThreadPoolExecutor(n_jobs) as ex:
            draws = list(ex.map(lambda ss: _one_rep(dgp, ss, model, names), children))
    else:
        draws = [_one_rep(dgp, ss, model, names) for ss in children]
    est = np.vstack(draws)
    err = est - np.array([truth[k] for k in names])
    mean = err.mean(axis=0)
    mcse = err.std(axis=0, ddof=1) / np.sqrt(reps)
    return BiasReport(
        rho_true=dgp.rho, T=dgp.T, n=dgp.n,
        analytic_rho_bias=nickell_bias_approx(dgp.rho, dgp.T - 1),
        mc_bias={k: (float(m), float(e)) for k, m, e in zip(names, mean, mcse)},
        replications=reps, seed=seed,
        mean_estimate={k: float(v) for k, v in zip(names, est.mean(axis=0))},
        truth={k: float(v) for k, v in truth.items()}, model=model,
    )
