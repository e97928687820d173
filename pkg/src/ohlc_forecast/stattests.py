"""Unit-root and cointegration tests used to route model selection.

Implements the augmented Dickey-Fuller test (intercept, no trend) with
AIC-selected augmentation lag, and the Johansen trace test with an
unrestricted constant. Both are deterministic pure functions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import lstsq

SIGNIFICANCE_LEVELS = (0.01, 0.05, 0.10)


class SeriesTooShortError(ValueError):
    """Input series is too short for the requested test."""


class SingularMomentError(np.linalg.LinAlgError):
    """Moment matrices are singular (collinear inputs)."""


# MacKinnon (2010) response-surface coefficients for the Dickey-Fuller
# t-distribution, constant-only regression: cv = b0 + b1/T + b2/T^2 + b3/T^3.
_ADF_CRIT = {
    0.01: (-3.43035, -6.5393, -16.786, -79.433),
    0.05: (-2.86154, -2.8903, -4.234, -40.040),
    0.10: (-2.56677, -1.5384, -2.809, 0.0),
}

# Trace-statistic critical values, Osterwald-Lenum (1992) Table 1*
# (intercept in the cointegrating relation), rows indexed by
# K - r0 = 1..12, columns at 90% / 95% / 99%. Row 12 is a quadratic
# extrapolation of rows 9-11 (the published table stops at 11).
_JOHANSEN_TRACE_CRIT = np.array(
    [
        [7.52, 9.24, 12.97],
        [17.85, 19.96, 24.60],
        [32.00, 34.91, 41.07],
        [49.65, 53.12, 60.16],
        [71.86, 76.07, 84.45],
        [97.18, 102.14, 111.01],
        [126.58, 131.70, 143.09],
        [159.48, 165.58, 177.20],
        [196.37, 202.92, 215.74],
        [236.54, 244.15, 257.68],
        [282.45, 291.40, 307.64],
        [334.10, 344.67, 365.62],
    ]
)
_SIG_COLUMN = {0.10: 0, 0.05: 1, 0.01: 2}


def adf_critical_value(significance: float, nobs: int) -> float:
    """Finite-sample ADF critical value (constant, no trend)."""
    b = _ADF_CRIT[significance]
    return b[0] + b[1] / nobs + b[2] / nobs**2 + b[3] / nobs**3


def johansen_critical_value(n_remaining: int, significance: float) -> float:
    """Trace critical value for testing rank <= r0 with n_remaining = K - r0."""
    if not 1 <= n_remaining <= 12:
        raise ValueError(f"critical values tabulated for K - r0 in 1..12, got {n_remaining}")
    return float(_JOHANSEN_TRACE_CRIT[n_remaining - 1, _SIG_COLUMN[significance]])


def _check_significance(significance: float) -> None:
    if significance not in _SIG_COLUMN:
        raise ValueError(f"significance must be one of {SIGNIFICANCE_LEVELS}, got {significance}")


def _ols(X: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Least squares via rank-revealing lstsq; returns (coef, residuals)."""
    coef, _, rank, _ = lstsq(X, y, lapack_driver="gelsy")
    if rank < X.shape[1]:
        raise SingularMomentError("rank-deficient regressor matrix")
    return coef, y - X @ coef


@dataclass(frozen=True)
class AdfResult:
    """Outcome of the ADF unit-root test on one series."""

    statistic: float
    lag_used: int
    reject_unit_root: bool
    significance: float
    degenerate: bool = False


def adf_test(series, significance: float = 0.05) -> AdfResult:
    """ADF test with intercept; augmentation lag chosen by AIC.

    The null is a unit root; `reject_unit_root=True` means the series looks
    stationary at the given level. Constant series are reported as a
    degenerate non-rejection.
    """
    _check_significance(significance)
    y = np.asarray(series, dtype=float).ravel()
    T = y.size
    if T < 20:
        raise SeriesTooShortError(f"ADF needs at least 20 observations, got {T}")
    if not np.all(np.isfinite(y)):
        raise ValueError("series contains non-finite values")
    if np.ptp(y) == 0.0:
        return AdfResult(float("nan"), 0, False, significance, degenerate=True)

    dy = np.diff(y)
    max_lag = int(np.floor(12.0 * (T / 100.0) ** 0.25))
    # keep the regression estimable on short windows
    max_lag = min(max_lag, (T - 1) // 2 - 2)
    max_lag = max(max_lag, 0)

    # common-sample AIC comparison: all candidates fit on the max_lag-trimmed rows
    n = T - 1 - max_lag
    lhs = dy[max_lag:]
    level = y[max_lag:-1]
    cols = [np.ones(n), level]
    for j in range(1, max_lag + 1):
        cols.append(dy[max_lag - j : -j])
    full = np.column_stack(cols)

    best = None
    for k in range(max_lag + 1):
        X = full[:, : 2 + k]
        try:
            _, resid = _ols(X, lhs)
        except SingularMomentError:
            continue
        ssr = float(resid @ resid)
        if ssr <= 0.0:
            ssr = np.finfo(float).tiny
        aic = n * np.log(ssr / n) + 2.0 * (2 + k)
        if best is None or aic < best[0] - 1e-12:
            best = (aic, k)
    if best is None:
        return AdfResult(float("nan"), 0, False, significance, degenerate=True)
    k = best[1]

    # refit on the longest sample the chosen lag allows
    n = T - 1 - k
    lhs = dy[k:]
    cols = [np.ones(n), y[k:-1]]
    for j in range(1, k + 1):
        cols.append(dy[k - j : -j])
    X = np.column_stack(cols)
    coef, resid = _ols(X, lhs)
    dof = n - X.shape[1]
    if dof <= 0:
        return AdfResult(float("nan"), k, False, significance, degenerate=True)
    sigma2 = float(resid @ resid) / dof
    xtx_inv = np.linalg.inv(X.T @ X)
    se = np.sqrt(sigma2 * xtx_inv[1, 1])
    stat = float(coef[1] / se)
    cv = adf_critical_value(significance, n)
    return AdfResult(stat, k, stat < cv, significance)


@dataclass(frozen=True)
class JohansenResult:
    """Johansen trace-test outcome: eigenstructure and the selected rank."""

    eigenvalues: np.ndarray
    trace_statistics: np.ndarray
    selected_rank: int
    significance: float
    eigenvectors: np.ndarray  # columns ordered by eigenvalue, first component scaled to 1


def _johansen_eig(Y: np.ndarray, p: int) -> tuple[np.ndarray, np.ndarray, int]:
    """Canonical-correlation eigenproblem of the VEC form with Y_{t-p} levels."""
    T, K = Y.shape
    dY = np.diff(Y, axis=0)
    # usable targets: t = p+1..T (1-based), N = T - p observations
    N = T - p
    lhs = dY[p - 1 :]  # ΔY_t
    levels = Y[: T - p]  # Y_{t-p}
    cols = [np.ones((N, 1))]
    for j in range(1, p):
        cols.append(dY[p - 1 - j : T - 1 - j])
    X = np.hstack(cols)

    _, R0 = _ols(X, lhs)
    _, R1 = _ols(X, levels)
    S00 = R0.T @ R0 / N
    S11 = R1.T @ R1 / N
    S01 = R0.T @ R1 / N

    try:
        L = np.linalg.cholesky(S11)
    except np.linalg.LinAlgError as exc:
        raise SingularMomentError("S11 not positive definite") from exc
    Linv = np.linalg.inv(L)
    try:
        M = S01.T @ np.linalg.solve(S00, S01)
    except np.linalg.LinAlgError as exc:
        raise SingularMomentError("S00 singular") from exc
    W = Linv @ M @ Linv.T
    W = (W + W.T) / 2.0
    eigvals, eigvecs = np.linalg.eigh(W)
    order = np.argsort(eigvals)[::-1]
    eigvals = np.clip(eigvals[order], 0.0, 1.0 - 1e-15)
    vectors = Linv.T @ eigvecs[:, order]  # back to the beta coordinate system
    # normalize each cointegrating vector so its first nonzero component is 1
    for i in range(vectors.shape[1]):
        col = vectors[:, i]
        nz = np.flatnonzero(np.abs(col) > 1e-12)
        if nz.size:
            vectors[:, i] = col / col[nz[0]]
    return eigvals, vectors, N


def johansen_trace_test(Y, p: int, significance: float = 0.05) -> JohansenResult:
    """Johansen trace test with unrestricted intercept; selects the rank.

    Tests r <= r0 sequentially for r0 = 0..K-1; the selected rank is the
    first r0 whose trace statistic fails to reject, or K if all reject.
    """
    _check_significance(significance)
    Y = np.asarray(Y, dtype=float)
    if Y.ndim != 2:
        raise ValueError("Y must be a (T, K) matrix")
    T, K = Y.shape
    if not 2 <= K <= 12:
        raise ValueError(f"dimension K must be in [2, 12], got {K}")
    if p < 1:
        raise ValueError(f"lag order must be >= 1, got {p}")
    if T < K * p + 20:
        raise SeriesTooShortError(f"need at least {K * p + 20} observations, got {T}")
    if not np.all(np.isfinite(Y)):
        raise ValueError("Y contains non-finite values")

    eigvals, vectors, N = _johansen_eig(Y, p)
    log1m = np.log(1.0 - eigvals)
    trace = np.array([-N * log1m[r0:].sum() for r0 in range(K)])

    selected = K
    for r0 in range(K):
        if trace[r0] < johansen_critical_value(K - r0, significance):
            selected = r0
            break
    return JohansenResult(eigvals, trace, selected, significance, vectors)
