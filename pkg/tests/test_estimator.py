import dataclasses

import numpy as np
import pytest

from conftest import dense_lsdv, explicit_c_ssh, random_frame
from tglsdv.bias import DGP, simulate_frame
from tglsdv.errors import CollinearityError, DegenerateGroupError, InsufficientDofError
from tglsdv.estimator import (FitResult, coefficient_sum, covariance, fit_baseline,
                              fit_interactions, fit_semiparametric, fit_timevarying,
                              fit_two_groups_lsdv, fit_within, recover_effects,
                              spline_curve)
from tglsdv.preprocess import DesignSpec, RegressionFrame


def _reorder(p):
    return [p] + list(range(p)) + [p + 1]


def test_noiseless_within(rng):
    n, T = 5, 10
    x = rng.normal(size=(n, T + 1))
    eta = rng.normal(size=n)
    Y = np.zeros((n, T + 1))
    Y[:, 0] = rng.normal(size=n)
    for t in range(1, T + 1):
        Y[:, t] = 0.5 * Y[:, t - 1] + 2 * x[:, t] + eta
    fr = RegressionFrame(Y[:, 1:].ravel(), Y[:, :-1].ravel(), x[:, 1:].reshape(-1, 1),
                         ("x",), tuple("ABCDE"), np.arange(n) < 2, tuple(range(T)), 1)
    rho, beta, eta_bar = fit_within(fr)
    assert rho == pytest.approx(0.5, abs=1e-10)
    assert beta[0] == pytest.approx(2.0, abs=1e-10)
    np.testing.assert_allclose(eta_bar, eta, atol=1e-10)


def test_frisch_waugh_against_full_dummies(rng):
    for _ in range(30):
        n = int(rng.integers(4, 13))
        T = int(rng.integers(4, 11))
        fr = random_frame(rng, n, int(rng.integers(1, n)), T)
        rho, beta, _ = fit_within(fr)
        D = np.kron(np.eye(n), np.ones((T, 1)))
        W = np.column_stack([fr.y_lag, fr.X, D])
        b, *_ = np.linalg.lstsq(W, fr.y, rcond=None)
        np.testing.assert_allclose(np.r_[rho, beta], b[:4], rtol=1e-9, atol=1e-12)


def test_recover_examples():
    eta_g, ssh, tilde = recover_effects([2, 4, 1, 3], 2)
    assert (eta_g, ssh) == (2.0, 1.0)
    np.testing.assert_array_equal(tilde, [-1, 1, -1, 1])
    eta_g, ssh, tilde = recover_effects(np.full(6, 0.37), 4)
    assert eta_g == pytest.approx(0.37) and ssh == pytest.approx(0.0, abs=1e-15)
    np.testing.assert_allclose(tilde, 0.0, atol=1e-15)


def test_recover_identity(rng):
    for _ in range(50):
        n = int(rng.integers(2, 30))
        s = int(rng.integers(1, n))
        m = rng.normal(size=n)
        eta_g, ssh, tilde = recover_effects(m, s)
        rebuilt = eta_g + ssh * (np.arange(n) < s) + tilde
        np.testing.assert_allclose(rebuilt, m, rtol=0, atol=1e-14)
        assert abs(tilde[:s].sum()) < 1e-12 and abs(tilde[s:].sum()) < 1e-12


@pytest.mark.parametrize("s", [0, 4])
def test_recover_degenerate(s):
    with pytest.raises(DegenerateGroupError):
        recover_effects([1, 2, 3, 4], s)


def test_baseline_matches_dense(rng):
    for _ in range(20):
        n = int(rng.integers(4, 13))
        s = int(rng.integers(1, n))
        T = int(rng.integers(4, 11))
        fr = random_frame(rng, n, s, T)
        fit = fit_baseline(fr)
        coef, tilde, cov, rss = dense_lsdv(fr)
        sel = _reorder(4)
        np.testing.assert_allclose(fit.coef, coef[sel], rtol=1e-9, atol=1e-12)
        np.testing.assert_allclose(fit.eta_tilde_hat, tilde, rtol=1e-9, atol=1e-11)
        np.testing.assert_allclose(fit.cov, cov[np.ix_(sel, sel)], rtol=1e-8, atol=1e-14)
        assert fit.rss == pytest.approx(rss, rel=1e-9)
        assert fit.k_params == 4 + n and fit.dof == n * T - 4 - n


def test_partitioned_covariance_full(rng):
    n, s, T = 7, 3, 6
    fr = random_frame(rng, n, s, T)
    A = np.column_stack([fr.y_lag, fr.X])
    C = explicit_c_ssh(n, s, T)
    W = np.column_stack([A, C])
    np.testing.assert_allclose(covariance(A, n, s, T, 2.5), 2.5 * np.linalg.inv(W.T @ W),
                               rtol=1e-8, atol=1e-12)


def test_fit_invariants(rng):
    fit = fit_baseline(random_frame(rng, 9, 4, 8))
    assert np.allclose(fit.cov, fit.cov.T, atol=0)
    assert np.linalg.eigvalsh(fit.cov).min() > -1e-15
    np.testing.assert_array_equal(np.diag(fit.corr), 1.0)
    i = fit.names.index("SSH")
    assert fit.corr[i, i] == 1.0
    assert abs(fit.eta_tilde_hat[:4].sum()) < 1e-10
    assert abs(fit.eta_tilde_hat[4:].sum()) < 1e-10


def test_total_effect_identity(rng):
    fr = random_frame(rng, 8, 3, 7)
    fit = fit_baseline(fr)
    rho, beta, eta_bar = fit_within(fr)
    np.testing.assert_allclose(fit.total_effects, eta_bar, atol=1e-12)


def test_permutation_within_groups(rng):
    n, s, T = 10, 4, 6
    fr = random_frame(rng, n, s, T)
    perm = np.r_[rng.permutation(s), s + rng.permutation(n - s)]
    rows = (perm[:, None] * T + np.arange(T)).ravel()
    pf = dataclasses.replace(fr, y=fr.y[rows], y_lag=fr.y_lag[rows], X=fr.X[rows],
                             countries=tuple(np.array(fr.countries)[perm]))
    a, b = fit_baseline(fr), fit_baseline(pf)
    assert a["SSH"] == pytest.approx(b["SSH"], rel=1e-10)
    np.testing.assert_allclose(a.coef, b.coef, rtol=1e-9)
    np.testing.assert_allclose(a.eta_tilde_hat[perm], b.eta_tilde_hat, atol=1e-10)


def test_fixed_effect_shift_invariance():
    dgp = DGP(n=12, s=4, T=20, sigma_nu=0.05)
    shifted = dataclasses.replace(dgp, eta_g=dgp.eta_g + 0.7)
    a = fit_baseline(simulate_frame(dgp, np.random.default_rng(5)))
    fr_b = simulate_frame(shifted, np.random.default_rng(5))
    b = fit_baseline(fr_b)
    # the shifted DGP sees the same shocks; SSH and slopes are unchanged
    assert a["SSH"] == pytest.approx(b["SSH"], abs=1e-8)
    assert b.rho_hat == pytest.approx(a.rho_hat, abs=1e-10)
    # the whole path moves by 0.7 / (1 - rho)
    c = 0.7 / (1 - dgp.rho)
    assert b["Intercept"] - a["Intercept"] == pytest.approx(c * (1 - a.rho_hat), abs=1e-8)
    np.testing.assert_allclose(a.eta_tilde_hat, b.eta_tilde_hat, atol=1e-8)


def test_constant_shift_of_y(rng):
    fr = random_frame(rng, 8, 3, 9)
    fit = fit_baseline(fr)
    c = 3.0
    sh = dataclasses.replace(fr, y=fr.y + c, y_lag=fr.y_lag + c)
    g = fit_baseline(sh)
    A = np.column_stack([fr.y_lag, fr.X])
    res_a = fr.y - A @ np.r_[fit.rho_hat, fit.beta_hat] - np.repeat(fit.total_effects, 9)
    A2 = np.column_stack([sh.y_lag, sh.X])
    res_b = sh.y - A2 @ np.r_[g.rho_hat, g.beta_hat] - np.repeat(g.total_effects, 9)
    np.testing.assert_allclose(res_a, res_b, atol=1e-10)
    assert g["SSH"] == pytest.approx(fit["SSH"], abs=1e-10)
    assert g["Intercept"] - fit["Intercept"] == pytest.approx(c * (1 - fit.rho_hat), abs=1e-10)


def test_collinearity_names_columns(rng):
    fr = random_frame(rng, 6, 2, 5)
    bad = fr.with_columns(fr.X[:, :1] * 2.0, ["dup"])
    with pytest.raises(CollinearityError) as err:
        fit_baseline(bad)
    assert {"x0", "dup"} & set(err.value.columns)
    const = dataclasses.replace(fr, X=np.column_stack([fr.X, np.ones(fr.n_obs)]),
                                x_names=fr.x_names + ("const",))
    with pytest.raises(CollinearityError):
        fit_baseline(const)


def test_insufficient_dof(rng):
    fr = random_frame(rng, 4, 2, 2)
    with pytest.raises(InsufficientDofError):
        fit_baseline(fr)


def test_degenerate_group_fit(rng):
    fr = random_frame(rng, 5, 2, 6)
    with pytest.raises(DegenerateGroupError):
        fit_baseline(dataclasses.replace(fr, ssh=np.zeros(5, bool)))


def test_dispatch(rng):
    fr = random_frame(rng, 6, 2, 8)
    assert fit_two_groups_lsdv(fr).model == "baseline"
    assert fit_two_groups_lsdv(fr, DesignSpec("interact")).model == "interact"
    assert fit_two_groups_lsdv(fr, DesignSpec("timevary")).model == "timevary"
    semi = fit_two_groups_lsdv(fr, DesignSpec("semi", knot_grid=(0, 1)))
    assert semi.model == "semi" and set(semi.extras["knots"]) == set(fr.x_names)


def test_baseline_recovers_ssh():
    dgp = DGP(rho=0.5, beta=(1.0, -0.5, 0.25), ssh=-0.3, n=20, s=6, T=41, sigma_nu=0.01)
    est = [fit_baseline(simulate_frame(dgp, np.random.default_rng(i)))["SSH"]
           for i in range(60)]
    mc = np.std(est, ddof=1) / np.sqrt(len(est))
    assert abs(np.mean(est) + 0.3) < 3 * mc + 1e-12


def test_joint_baseline_agrees_with_two_step(rng):
    from tglsdv.estimator import _joint_fit
    fr = random_frame(rng, 7, 3, 6)
    A = np.column_stack([fr.y_lag, fr.X])
    names = ["lag y", *fr.x_names]
    a = fit_baseline(fr)
    b = _joint_fit(fr, A, names, "baseline")
    np.testing.assert_allclose(a.coef, b.coef, rtol=1e-9)
    np.testing.assert_allclose(a.cov, b.cov, rtol=1e-7, atol=1e-14)
    np.testing.assert_allclose(a.eta_tilde_hat, b.eta_tilde_hat, atol=1e-10)
    np.testing.assert_allclose(a.eta_tilde_se, b.eta_tilde_se, rtol=1e-7)


def test_timevarying_fit():
    path = -0.2 * np.ones(15)
    dgp = DGP(rho=0.5, beta=(1.0, -0.5, 0.25), ssh=tuple(path), n=20, s=6, T=16)
    est = np.array([fit_timevarying(simulate_frame(dgp, np.random.default_rng(i))).ssh_hat
                    for i in range(60)])
    mc = est.std(axis=0, ddof=1) / np.sqrt(60)
    assert np.all(np.abs(est.mean(axis=0) + 0.2) < 3 * mc)
    fit = fit_timevarying(simulate_frame(dgp, np.random.default_rng(0)))
    assert abs(fit.eta_tilde_hat[:6].sum()) < 1e-10
    assert abs(fit.eta_tilde_hat[6:].sum()) < 1e-10
    assert fit.k_params == 4 + 15 + 20 - 1


def test_time_varying_constant_path_matches_joint_rank(rng):
    fr = random_frame(rng, 6, 2, 5)
    fit = fit_timevarying(fr)
    assert len(fit.ssh_hat) == 5 and "SSH" not in fit.names


def test_interactions_zero_and_sum():
    dgp = DGP(rho=0.5, beta=(1.0, -0.5, 0.25), ssh=-0.1, n=20, s=6, T=21, sigma_nu=0.05)
    names = ["1_SSH lag y", "1_SSH lnn", "1_SSH lnsk", "1_SSH lnattain"]
    est = np.array([[fit_interactions(simulate_frame(dgp, np.random.default_rng(i)))[k]
                     for k in names] for i in range(60)])
    mc = est.std(axis=0, ddof=1) / np.sqrt(60)
    assert np.all(np.abs(est.mean(axis=0)) < 3 * mc)
    fit = fit_interactions(simulate_frame(dgp, np.random.default_rng(0)))
    tot, se = fit.extras["totals"]["lnn"]
    assert tot == pytest.approx(fit["lnn"] + fit["1_SSH lnn"])
    v = np.zeros(len(fit.names))
    v[fit.names.index("lnn")] = v[fit.names.index("1_SSH lnn")] = 1
    assert se == pytest.approx(np.sqrt(v @ fit.cov @ v))


def test_coefficient_sum_table_values():
    fit = FitResult("interact", 5, ["lnn", "1_SSH lnn"], np.array([-0.0129, 0.0357]),
                    np.diag([1e-4, 4e-4]), np.zeros(2), np.zeros(2), ["A", "B"],
                    np.array([True, False]), [2000], 1.0, 10, 4)
    est, se = coefficient_sum(fit, "lnn", "1_SSH lnn")
    assert est == pytest.approx(0.0228, abs=1e-12)
    assert se == pytest.approx(np.sqrt(5e-4))


def test_semiparametric_linear_dgp():
    dgp = DGP(rho=0.5, beta=(0.3, -0.2, 0.1), n=20, s=6, T=21, sigma_nu=0.05)
    fr = simulate_frame(dgp, np.random.default_rng(3))
    fit = fit_semiparametric(fr)
    assert fit.extras["knots"] == {"lnn": 0, "lnsk": 0, "lnattain": 0}
    for v, b in zip(fr.x_names, dgp.beta):
        assert fit.extras["implied_slopes"][v] == pytest.approx(b, abs=0.02)
        x = np.linspace(-1, 1, 5)
        curve = spline_curve(fit, v, x)
        assert np.ptp(np.diff(curve)) < 0.02
    assert abs(fit.eta_tilde_hat[:6].sum()) < 1e-10
    # BIC of the chosen fit equals the searched minimum
    search = fit._search
    assert fit.bic == pytest.approx(min(search["bic"]), rel=1e-9)


def test_semiparametric_picks_nonlinear():
    dgp = DGP(rho=0.5, beta=(0.3, -0.2, 0.1), n=20, s=6, T=21, sigma_nu=0.02)
    fr = simulate_frame(dgp, np.random.default_rng(7))
    x = fr.X[:, 1]
    y = fr.y + 0.3 * np.sin(3 * x)
    fit = fit_semiparametric(dataclasses.replace(fr, y=y), knot_grid=(0, 1, 3, 5))
    assert fit.extras["knots"]["lnsk"] > 0
    assert fit.extras["knots"]["lnn"] == 0


def test_json_round_trip(rng):
    fit = fit_interactions(random_frame(rng, 7, 3, 6))
    back = FitResult.loads(fit.dumps())
    np.testing.assert_array_equal(back.coef, fit.coef)
    np.testing.assert_array_equal(back.cov, fit.cov)
    assert back.names == fit.names and back.bic == fit.bic
    assert back.dumps() == fit.dumps()
