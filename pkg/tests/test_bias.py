import dataclasses

import numpy as np
import pytest

from tglsdv.bias import DGP, BiasReport, monte_carlo_bias, nickell_bias_approx, simulate_frame
from tglsdv.errors import SeriesTooShortError, UnstableDGPError

AR1 = dict(beta=(), x_mean=(), x_sd=(), x_names=(), ssh=0.0)


def _direct_formula(rho, T):
    """Closed form written with the (1 - rho) denominators, valid for rho != 1."""
    a = (1 - rho ** T) / (1 - rho)
    num = 1 - a / T
    den = 1 - 2 * rho / ((1 - rho) * (T - 1)) * (1 - a / T)
    return -(1 + rho) / (T - 1) * num / den


def test_formula_at_zero():
    assert nickell_bias_approx(0.0, 3) == pytest.approx(-1 / 3, abs=1e-15)
    assert nickell_bias_approx(0.0, 101) == pytest.approx(-1 / 101, rel=0.05)


@pytest.mark.parametrize("rho", [-0.5, 0.1, 0.5, 0.9, 0.99])
@pytest.mark.parametrize("T", [3, 10, 48])
def test_formula_matches_direct(rho, T):
    assert nickell_bias_approx(rho, T) == pytest.approx(_direct_formula(rho, T), rel=1e-10)


def test_formula_limit_and_sign():
    for T in (5, 48):
        assert nickell_bias_approx(1.0, T) == pytest.approx(-3 / (T + 1), rel=1e-12)
        assert nickell_bias_approx(1 - 1e-7, T) == pytest.approx(-3 / (T + 1), rel=1e-5)
        for rho in np.linspace(0.01, 0.99, 20):
            assert nickell_bias_approx(rho, T) < 0


def test_formula_errors():
    with pytest.raises(SeriesTooShortError):
        nickell_bias_approx(0.5, 2)


@pytest.mark.slow
def test_formula_against_monte_carlo():
    dgp = DGP(rho=0.9, n=500, s=100, T=49, sigma_eta=0.1, **AR1)
    rep = monte_carlo_bias(dgp, reps=1000, seed=11, n_jobs=4)
    bias, se = rep.mc_bias["lag y"]
    assert abs(bias - nickell_bias_approx(0.9, 48)) < 3 * se
    assert rep.analytic_rho_bias == nickell_bias_approx(0.9, 48)


def test_zero_noise_zero_bias():
    dgp = DGP(n=12, s=4, T=15, sigma_nu=0.0)
    rep = monte_carlo_bias(dgp, reps=200, seed=3)
    for k, (b, se) in rep.mc_bias.items():
        assert abs(b) < 1e-9, k


def test_mc_se_root_n_law():
    dgp = DGP(n=15, s=5, T=12, sigma_nu=0.05)
    a = monte_carlo_bias(dgp, reps=400, seed=1)
    b = monte_carlo_bias(dgp, reps=1600, seed=2)
    for k in a.mc_bias:
        ratio = a.mc_bias[k][1] / b.mc_bias[k][1]
        assert 2 * 0.7 < ratio < 2 * 1.3, (k, ratio)


def test_determinism_and_jobs():
    dgp = DGP(n=10, s=3, T=10, sigma_nu=0.05)
    a = monte_carlo_bias(dgp, reps=200, seed=9)
    b = monte_carlo_bias(dgp, reps=200, seed=9)
    c = monte_carlo_bias(dgp, reps=200, seed=9, n_jobs=4)
    assert a == b
    assert a.to_dict() == c.to_dict()
    assert monte_carlo_bias(dgp, reps=200, seed=10).to_dict() != a.to_dict()


@pytest.mark.parametrize("T", [10, 48])
@pytest.mark.parametrize("rho", [0.35, 0.9, 0.99])
def test_rho_bias_negative(rho, T):
    dgp = DGP(rho=rho, n=60, s=15, T=T + 1, sigma_eta=0.2, **AR1)
    b, se = monte_carlo_bias(dgp, reps=200, seed=5).mc_bias["lag y"]
    assert b < 0 and b + 3 * se < 0


def test_errors():
    with pytest.raises(UnstableDGPError):
        monte_carlo_bias(DGP(rho=1.0), reps=200)
    with pytest.raises(UnstableDGPError):
        simulate_frame(DGP(rho=-1.2), np.random.default_rng(0))
    with pytest.raises(ValueError):
        monte_carlo_bias(DGP(), reps=100)


def test_time_varying_truth_and_frame():
    path = tuple(np.linspace(-0.2, 0.0, 9))
    dgp = DGP(ssh=path, n=8, s=3, T=10)
    assert dgp.time_varying
    t = dgp.truth()
    assert [t[f"SSH {y}"] for y in dgp.years()] == list(path)
    fr = simulate_frame(dgp, np.random.default_rng(0))
    assert fr.n_obs == 8 * 9 and fr.s == 3 and fr.years == dgp.years()
    with pytest.raises(ValueError):
        dataclasses.replace(dgp, ssh=(0.1, 0.2)).ssh_path()


def test_report_rendering_and_claim():
    rep = BiasReport(0.99, 48, 81, -0.06, {"lnn": (2e-4, 1e-4), "lnsk": (-1e-4, 5e-5)},
                     200, 1, truth={"lnn": -0.01, "lnsk": 0.03})
    chk = rep.claim_check()
    assert chk["confirmed"] and chk["upper_abs_bias"]["lnn"] == pytest.approx(2e-4 + 1.96e-4)
    txt = rep.render(["lnn", "lnsk"])
    assert "confirmed" in txt and "not confirmed" not in txt
    bad = dataclasses.replace(rep, mc_bias={"lnn": (2e-3, 1e-4)})
    assert not bad.claim_check()["confirmed"]
