"""From raw series to regression variables: HP trends, spline-filled
attainment, log transforms, and the stacked regression frame."""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np
from scipy import linalg

from . import kernels
from .errors import (
    DomainError,
    InsufficientSupportError,
    NonFiniteError,
    SeriesTooShortError,
)
from .panel import Panel

HP_LAMBDAS = (6.25, 25.0, 100.0, 400.0, 1600.0)
DEFAULT_SMOOTHING = {"y": 100.0, "lnsk": 25.0, "lnn": None, "lnattain": None}
REGRESSORS = ("lnn", "lnsk", "lnattain")


@dataclass(frozen=True)
class HPDecomposition:
    trend: np.ndarray
    cycle: np.ndarray
    lam: float


def hp_filter(series, lam: float) -> HPDecomposition:
    """Hodrick-Prescott decomposition.

    The trend minimises ``sum (x_t - tau_t)^2 + lam * sum (D2 tau)_t^2`` and
    solves the pentadiagonal system ``(I + lam D2'D2) tau = x``.
    """
    x = np.ascontiguousarray(series, dtype=float)
    if x.ndim != 1:
        raise ValueError("hp_filter expects a 1-d series")
    if x.size < 4:
        raise SeriesTooShortError(f"HP filter needs T >= 4, got {x.size}")
    if not np.all(np.isfinite(x)):
        raise NonFiniteError("series contains non-finite values")
    if not lam >= 0:
        raise ValueError(f"lambda must be non-negative, got {lam}")
    trend = kernels.hp_trend(x, float(lam))
    return HPDecomposition(trend, x - trend, float(lam))


def interpolate_spline(values, knots_years, target_years) -> np.ndarray:
    """Natural cubic interpolating spline through ``(knots_years, values)``.

    Targets outside the knot range are evaluated on the adjacent end piece.
    """
    xk = np.asarray(knots_years, dtype=float)
    yk = np.asarray(values, dtype=float)
    xt = np.asarray(target_years, dtype=float)
    if xk.shape != yk.shape or xk.ndim != 1:
        raise ValueError("values and knots_years must be 1-d of equal length")
    if xk.size < 4:
        raise InsufficientSupportError(f"need at least 4 support points, got {xk.size}")
    h = np.diff(xk)
    if np.any(h <= 0):
        raise ValueError("knots_years must be strictly increasing")
    m = xk.size
    # second derivatives at interior knots; zero at both ends
    slopes = np.diff(yk) / h
    rhs = 6.0 * np.diff(slopes)
    ab = np.zeros((3, m - 2))
    ab[0, 1:] = h[1:-1]
    ab[1] = 2.0 * (h[:-1] + h[1:])
    ab[2, :-1] = h[1:-1]
    M = np.zeros(m)
    M[1:-1] = linalg.solve_banded((1, 1), ab, rhs)
    k = np.clip(np.searchsorted(xk, xt, side="right") - 1, 0, m - 2)
    hk = h[k]
    a = xk[k + 1] - xt
    b = xt - xk[k]
    return ((M[k] * a ** 3 + M[k + 1] * b ** 3) / (6.0 * hk)
            + (yk[k] / hk - M[k] * hk / 6.0) * a
            + (yk[k + 1] / hk - M[k + 1] * hk / 6.0) * b)


def _log(mat, panel, name):
    bad = np.argwhere(~(mat > 0))
    if bad.size:
        i, t = bad[0]
        raise DomainError(panel.countries[i], panel.years[t], name, float(mat[i, t]))
    return np.log(mat)


def _smooth(mat, lam):
    if lam is None:
        return mat
    return np.vstack([hp_filter(row, lam).trend for row in mat])


def build_variables(panel: Panel, smoothing: dict | None = None,
                    g_plus_delta: float = 0.05) -> Panel:
    """Construct ``y, lnn, lnsk, lnattain`` from the raw roles.

    ``y`` is the log of per-worker GDP, ``lnn = log(n + g_plus_delta)``,
    ``lnsk`` the log investment share and ``lnattain`` the log of attainment
    (spline-interpolated to every year when it was read as a sparse series).
    ``smoothing`` maps output names to an HP lambda or ``None``; unspecified
    names use ``DEFAULT_SMOOTHING``.
    """
    lams = dict(DEFAULT_SMOOTHING)
    lams.update(smoothing or {})
    years = np.array(panel.years)

    if "attain" in panel.sparse:
        obs, mat = panel.sparse["attain"]
        attain = np.vstack([interpolate_spline(row, obs, years) for row in mat])
    else:
        attain = panel.series["attain"]

    out = {
        "y": _smooth(_log(panel.series["y"], panel, "y"), lams["y"]),
        "lnn": _smooth(_log(panel.series["n"] + g_plus_delta, panel, "n"), lams["lnn"]),
        "lnsk": _smooth(_log(panel.series["sk"], panel, "sk"), lams["lnsk"]),
        "lnattain": _smooth(_log(attain, panel, "attain"), lams["lnattain"]),
    }
    return panel.with_series(out, sparse={})


@dataclass(frozen=True)
class DesignSpec:
    """Model variant and its configuration.

    ``model`` is one of ``baseline``, ``semi``, ``interact``, ``timevary``.
    ``knot_grid`` lists the interior-knot counts searched by the
    semiparametric fit.
    """

    model: str = "baseline"
    lag: int = 1
    regressors: tuple = REGRESSORS
    trend: bool = False
    knot_grid: tuple = (0, 1, 3, 4, 5, 6, 7, 8, 9, 10)

    def __post_init__(self):
        if self.model not in ("baseline", "semi", "interact", "timevary"):
            raise ValueError(f"unknown model {self.model!r}")
        if self.lag not in (1, 5):
            raise ValueError(f"lag must be 1 or 5, got {self.lag}")


@dataclass(frozen=True)
class RegressionFrame:
    """Stacked regression data, country-major with SSH countries first.

    Row ``i * T_eff + t`` holds country ``countries[i]`` in year ``years[t]``.
    ``ssh_time`` carries the SSH-by-period dummy block of the time-varying
    model, kept apart from ``X`` because it is not absorbed by the within
    transform.
    """

    y: np.ndarray
    y_lag: np.ndarray
    X: np.ndarray
    x_names: tuple
    countries: tuple
    ssh: np.ndarray
    years: tuple
    lag: int
    ssh_time: np.ndarray | None = None
    meta: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return len(self.countries)

    @property
    def s(self) -> int:
        return int(np.sum(self.ssh))

    @property
    def T_eff(self) -> int:
        return len(self.years)

    @property
    def n_obs(self) -> int:
        return self.y.shape[0]

    @property
    def country_index(self) -> np.ndarray:
        return np.repeat(np.arange(self.n), self.T_eff)

    @property
    def ssh_rows(self) -> np.ndarray:
        return np.repeat(np.asarray(self.ssh, bool), self.T_eff)

    def row_index(self, r: int) -> tuple:
        return self.countries[r // self.T_eff], self.years[r % self.T_eff]

    def with_columns(self, X, names) -> "RegressionFrame":
        return replace(self, X=np.column_stack([self.X, X]),
                       x_names=tuple(self.x_names) + tuple(names))


def make_frame(panel: Panel, lag: int = 1, spec: DesignSpec | None = None) -> RegressionFrame:
    """Stack the panel for a regression with a ``lag``-period lagged ``y``.

    With ``lag=1`` the regressors are contemporaneous; with ``lag=5`` they
    are dated ``t-5`` like the lagged dependent variable.
    """
    spec = spec or DesignSpec(lag=lag)
    if lag not in (1, 5):
        raise ValueError(f"lag must be 1 or 5, got {lag}")
    T = panel.T
    if T <= lag + 1:
        raise SeriesTooShortError(f"T={T} too short for lag {lag}")
    Y = panel.series["y"]
    cols = []
    for name in spec.regressors:
        M = panel.series[name]
        cols.append((M[:, lag:] if lag == 1 else M[:, :-lag]).ravel())
    names = list(spec.regressors)
    if spec.trend:
        t = np.arange(lag + 1, T + 1, dtype=float)
        cols.append(np.tile(t, panel.n))
        names.append("trend")
    X = np.column_stack(cols) if cols else np.empty((panel.n * (T - lag), 0))
    return RegressionFrame(
        y=Y[:, lag:].ravel().copy(),
        y_lag=Y[:, :-lag].ravel().copy(),
        X=X,
        x_names=tuple(names),
        countries=panel.countries,
        ssh=np.asarray(panel.ssh, bool).copy(),
        years=tuple(panel.years[lag:]),
        lag=lag,
    )
