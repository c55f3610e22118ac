import numpy as np
import pytest

from tglsdv.preprocess import RegressionFrame


def explicit_c_ssh(n, s, T_eff):
    """Dummy design written out row by row following the block layout."""
    C = np.zeros((n * T_eff, n))
    for i in range(n):
        rows = slice(i * T_eff, (i + 1) * T_eff)
        C[rows, 0] = 1.0
        if i < s:
            C[rows, 1] = 1.0
            if i < s - 1:
                C[rows, 2 + i] = 1.0
            else:
                C[rows, 2:2 + s - 1] = -1.0
        else:
            first = 2 + s - 1
            if i < n - 1:
                C[rows, first + (i - s)] = 1.0
            else:
                C[rows, first:first + n - s - 1] = -1.0
    return C


def dense_lsdv(frame):
    """Brute-force OLS of y on (y_lag, X, explicit C_SSH).

    Returns coefficients ordered (theta, eta_g, SSH, identified effects),
    the full n-vector of centered effects and sigma^2 (W'W)^{-1}.
    """
    n, s, T = frame.n, frame.s, frame.T_eff
    C = explicit_c_ssh(n, s, T)
    W = np.column_stack([frame.y_lag, frame.X, C])
    coef, *_ = np.linalg.lstsq(W, frame.y, rcond=None)
    resid = frame.y - W @ coef
    N, k = W.shape
    sigma2 = resid @ resid / (N - k)
    cov = sigma2 * np.linalg.inv(W.T @ W)
    p = 1 + frame.X.shape[1]
    eff = coef[p + 2:]
    a = list(eff[:s - 1]) + [-eff[:s - 1].sum()]
    b = list(eff[s - 1:]) + [-eff[s - 1:].sum()]
    return coef, np.array(a + b), cov, float(resid @ resid)


def random_frame(rng, n, s, T_eff, K=3, rho=0.5, noise=0.1):
    beta = rng.normal(size=K)
    eta = rng.normal(size=n)
    X = rng.normal(size=(n, T_eff + 1, K))
    Y = np.zeros((n, T_eff + 1))
    Y[:, 0] = rng.normal(size=n)
    for t in range(1, T_eff + 1):
        Y[:, t] = rho * Y[:, t - 1] + X[:, t] @ beta + eta + noise * rng.normal(size=n)
    return RegressionFrame(
        y=Y[:, 1:].ravel(), y_lag=Y[:, :-1].ravel(),
        X=X[:, 1:].reshape(n * T_eff, K), x_names=tuple(f"x{k}" for k in range(K)),
        countries=tuple(f"C{i}" for i in range(n)), ssh=np.arange(n) < s,
        years=tuple(range(2001, 2001 + T_eff)), lag=1,
    )


@pytest.fixture
def rng():
    return np.random.default_rng(20140101)
