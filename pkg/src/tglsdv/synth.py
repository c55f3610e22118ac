"""Synthetic raw country-year data shaped like a PWT / Barro-Lee extract.

Used for the shipped fixture and end-to-end tests; the numbers carry no
empirical meaning.
"""

from __future__ import annotations

import csv
from importlib import resources
from pathlib import Path

import numpy as np

TRUE_COEF = {"rho": 0.95, "lnn": -0.01, "lnsk": 0.03, "lnattain": -0.015, "ssh": -0.03}


def data_path(name: str) -> Path:
    return Path(str(resources.files("tglsdv") / "data" / name))


def sample_countries() -> list[dict]:
    with open(data_path("sample_countries.csv"), newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


def _smooth_walk(rng, n, T, sd, rho=0.9):
    e = rng.normal(0.0, sd, (n, T))
    out = np.zeros((n, T))
    for t in range(1, T):
        out[:, t] = rho * out[:, t - 1] + e[:, t]
    return np.cumsum(out, axis=1) / np.sqrt(T)


def synthetic_raw(seed: int = 2014, years=range(1960, 2008), attain_step: int = 5):
    """Rows ``(code, year, rgdpwok, popgrowth, ki, attain)``; ``attain`` is
    filled only every ``attain_step`` years up to 2005."""
    rng = np.random.default_rng(seed)
    info = sample_countries()
    codes = [r["code"] for r in info]
    ssh = np.array([r["region"] == "Sub-Saharan Africa" for r in info])
    years = list(years)
    n, T = len(codes), len(years)

    pop = 0.02 + 0.006 * ssh[:, None] + 0.004 * rng.standard_normal((n, 1)) \
        + 0.004 * _smooth_walk(rng, n, T, 0.2)
    pop = np.clip(pop, 0.001, None)
    lnsk_trend = np.log(0.2) - 0.4 * ssh[:, None] + 0.3 * rng.standard_normal((n, 1)) \
        + 0.4 * _smooth_walk(rng, n, T, 0.3)
    ki = np.exp(lnsk_trend + 0.08 * rng.standard_normal((n, T)))
    start = np.exp(rng.normal(1.0, 0.5, n) - 0.6 * ssh)
    gain = rng.uniform(2.0, 6.0, n)
    tt = (np.arange(T) - T / 2) / 8.0
    attain = start[:, None] + gain[:, None] / (1.0 + np.exp(-tt))[None, :]

    c = TRUE_COEF
    eta = rng.normal(0.0, 0.05, n)
    eta[ssh] -= eta[ssh].mean()
    eta[~ssh] -= eta[~ssh].mean()
    X = [np.log(pop + 0.05), lnsk_trend, np.log(attain)]
    drive = 0.45 + c["ssh"] * ssh + eta
    lny = np.empty((n, T))
    betax0 = c["lnn"] * X[0][:, 0] + c["lnsk"] * X[1][:, 0] + c["lnattain"] * X[2][:, 0]
    lny[:, 0] = (drive + betax0) / (1 - c["rho"])
    for t in range(1, T):
        betax = c["lnn"] * X[0][:, t] + c["lnsk"] * X[1][:, t] + c["lnattain"] * X[2][:, t]
        lny[:, t] = drive + c["rho"] * lny[:, t - 1] + betax + rng.normal(0.0, 0.004, n)
    cycle = np.zeros((n, T))
    shocks = rng.normal(0.0, 0.02, (n, T))
    for t in range(1, T):
        cycle[:, t] = 0.6 * cycle[:, t - 1] + shocks[:, t]
    gdp = np.exp(lny + cycle)

    rows = []
    for i, code in enumerate(codes):
        for t, year in enumerate(years):
            obs = (year - years[0]) % attain_step == 0 and year <= 2005
            rows.append([code, year, f"{gdp[i, t]:.6f}", f"{pop[i, t]:.6f}",
                         f"{ki[i, t]:.6f}", f"{attain[i, t]:.6f}" if obs else ""])
    return rows


def write_synthetic_csv(path, seed: int = 2014) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["code", "year", "rgdpwok", "popgrowth", "ki", "attain"])
        w.writerows(synthetic_raw(seed))
