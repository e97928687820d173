"""VAR(p) and VEC(p, r) estimation, AIC lag selection, and forecasting.

Models operate on the unconstrained K-dimensional series. Estimation is
ordinary least squares on the stacked regression form; VEC forecasting goes
through the exact levels-VAR representation so no integration error can
accumulate over the horizon.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .stattests import SingularMomentError, _johansen_eig, _ols


class RankDeficientError(np.linalg.LinAlgError):
    """Regressor matrix is rank deficient (collinear history)."""


@dataclass(frozen=True)
class VarModel:
    """Fitted VAR(p): intercept, lag matrices, residuals."""

    K: int
    p: int
    alpha: np.ndarray  # (K,)
    A: np.ndarray  # (p, K, K)
    residuals: np.ndarray  # (T - p, K)
    residual_cov: np.ndarray  # (K, K)

    def to_json_dict(self) -> dict:
        return {
            "model": "VAR",
            "K": self.K,
            "p": self.p,
            "alpha": self.alpha.tolist(),
            "A": self.A.tolist(),
            "residual_cov": self.residual_cov.tolist(),
        }


@dataclass(frozen=True)
class VecModel:
    """Fitted VEC(p, r): short-run matrices plus the error-correction term."""

    K: int
    p: int
    r: int
    alpha: np.ndarray  # (K,)
    Gamma: np.ndarray  # (p - 1, K, K)
    gamma_loading: np.ndarray  # (K, r)
    beta_coint: np.ndarray  # (K, r)
    residual_cov: np.ndarray  # (K, K)

    def to_json_dict(self) -> dict:
        return {
            "model": "VEC",
            "K": self.K,
            "p": self.p,
            "r": self.r,
            "alpha": self.alpha.tolist(),
            "Gamma": self.Gamma.tolist(),
            "gamma_loading": self.gamma_loading.tolist(),
            "beta_coint": self.beta_coint.tolist(),
            "residual_cov": self.residual_cov.tolist(),
        }

    def levels_coefficients(self) -> np.ndarray:
        """Equivalent levels-VAR(p) lag matrices (companion algebra)."""
        K, p = self.K, self.p
        Pi = self.gamma_loading @ self.beta_coint.T
        A = np.zeros((p, K, K))
        if p == 1:
            A[0] = np.eye(K) + Pi
            return A
        A[0] = np.eye(K) + self.Gamma[0]
        for j in range(1, p - 1):
            A[j] = self.Gamma[j] - self.Gamma[j - 1]
        A[p - 1] = Pi - self.Gamma[p - 2]
        return A


@dataclass(frozen=True)
class ForecastPath:
    """Multi-step forecast in transformed space."""

    origin: int
    horizon: int
    values: np.ndarray  # (horizon, K)

    def __post_init__(self):
        if not np.all(np.isfinite(self.values)):
            raise ValueError("forecast path contains non-finite values")


def _lag_design(Y: np.ndarray, p: int, start: int) -> tuple[np.ndarray, np.ndarray]:
    """Targets Y_t and regressors [1, Y_{t-1}, ..., Y_{t-p}] for t >= start."""
    T = Y.shape[0]
    targets = Y[start:]
    cols = [np.ones((T - start, 1))]
    for j in range(1, p + 1):
        cols.append(Y[start - j : T - j])
    return np.hstack(cols), targets


def fit_var(Y, p: int) -> VarModel:
    """Least-squares fit of a VAR(p) with intercept."""
    Y = np.asarray(Y, dtype=float)
    T, K = Y.shape
    if p < 1:
        raise ValueError(f"lag order must be >= 1, got {p}")
    if T < K * p + p + 2:
        raise ValueError(f"need at least {K * p + p + 2} observations for VAR({p}), got {T}")
    Z, targets = _lag_design(Y, p, p)
    try:
        coef, resid = _ols(Z, targets)
    except SingularMomentError as exc:
        raise RankDeficientError(str(exc)) from exc
    alpha = coef[0]
    A = np.stack([coef[1 + j * K : 1 + (j + 1) * K].T for j in range(p)])
    dof = (T - p) - (K * p + 1)
    cov = resid.T @ resid / max(dof, 1)
    cov = (cov + cov.T) / 2.0
    return VarModel(K=K, p=p, alpha=alpha, A=A, residuals=resid, residual_cov=cov)


def default_p_max(T: int, K: int) -> int:
    """Default lag-search ceiling that keeps a VAR estimable on short windows."""
    return min(8, (T - 1) // (K + 1))


def aic_values(Y, p_max: int | None = None) -> np.ndarray:
    """Pooled-residual AIC for each candidate lag order 1..p_max.

    All candidates are fit on the common sample that holds out the first
    p_max rows, so their residual sums are comparable. The effective sample
    length after lag trimming is the T used in both AIC terms. Inestimable
    candidates get +inf.
    """
    Y = np.asarray(Y, dtype=float)
    T, K = Y.shape
    if p_max is None:
        p_max = default_p_max(T, K)
    if p_max < 1:
        raise ValueError(f"p_max must be >= 1, got {p_max}")
    if T <= K * p_max + p_max + 5:
        raise ValueError(f"sample of {T} too short for p_max={p_max}")
    n = T - p_max
    out = np.full(p_max, np.inf)
    for p in range(1, p_max + 1):
        Z, targets = _lag_design(Y, p, p_max)
        try:
            _, resid = _ols(Z, targets)
        except SingularMomentError:
            continue
        ssr = float((resid * resid).sum())
        if ssr <= 0.0:
            ssr = np.finfo(float).tiny
        out[p - 1] = np.log(ssr / n) + 2.0 * p * K * K / n
    return out


def select_lag_aic(Y, p_max: int | None = None) -> int:
    """Pick the VAR lag order minimizing AIC; ties break toward smaller p."""
    aics = aic_values(Y, p_max)
    if not np.any(np.isfinite(aics)):
        raise RankDeficientError("no candidate lag order was estimable")
    return int(np.argmin(aics)) + 1


def _recurse(alpha: np.ndarray, A: np.ndarray, history: np.ndarray, m: int) -> np.ndarray:
    p, K = A.shape[0], A.shape[1]
    buf = list(history[-p:])
    out = np.empty((m, K))
    for h in range(m):
        y = alpha.copy()
        for j in range(p):
            y += A[j] @ buf[-1 - j]
        out[h] = y
        buf.append(y)
    return out


def forecast_var(model: VarModel, history, m: int, origin: int = 0) -> ForecastPath:
    """Iterate the VAR recursion m steps ahead with the noise at its mean."""
    history = np.asarray(history, dtype=float)
    if history.shape != (model.p, model.K):
        raise ValueError(f"history must be ({model.p}, {model.K}), got {history.shape}")
    if m < 1:
        raise ValueError(f"horizon must be >= 1, got {m}")
    if not np.all(np.isfinite(history)):
        raise ValueError("history contains non-finite values")
    return ForecastPath(origin=origin, horizon=m, values=_recurse(model.alpha, model.A, history, m))


def fit_vec(Y, p: int, r: int, beta: np.ndarray | None = None) -> VecModel:
    """Fit a VEC(p, r): beta from the Johansen eigenvectors, rest by OLS."""
    Y = np.asarray(Y, dtype=float)
    T, K = Y.shape
    if not 0 < r < K:
        raise ValueError(f"rank must satisfy 0 < r < {K}, got {r}")
    if p < 1:
        raise ValueError(f"lag order must be >= 1, got {p}")
    if T < K * p + 20:
        raise ValueError(f"need at least {K * p + 20} observations, got {T}")
    if beta is None:
        _, vectors, _ = _johansen_eig(Y, p)
        beta = vectors[:, :r]
    beta = np.asarray(beta, dtype=float)
    if beta.shape != (K, r):
        raise ValueError(f"beta must be ({K}, {r}), got {beta.shape}")

    dY = np.diff(Y, axis=0)
    N = T - p
    lhs = dY[p - 1 :]
    ecm = Y[: T - p] @ beta  # beta' Y_{t-p}, one column per relation
    cols = []
    for j in range(1, p):
        cols.append(dY[p - 1 - j : T - 1 - j])
    cols.append(ecm)
    cols.append(np.ones((N, 1)))
    X = np.hstack(cols)
    try:
        coef, resid = _ols(X, lhs)
    except SingularMomentError as exc:
        raise RankDeficientError(str(exc)) from exc

    Gamma = np.stack(
        [coef[j * K : (j + 1) * K].T for j in range(p - 1)]
    ) if p > 1 else np.zeros((0, K, K))
    gamma = coef[(p - 1) * K : (p - 1) * K + r].T
    alpha = coef[-1]
    dof = N - X.shape[1]
    cov = resid.T @ resid / max(dof, 1)
    cov = (cov + cov.T) / 2.0
    return VecModel(
        K=K, p=p, r=r, alpha=alpha, Gamma=Gamma,
        gamma_loading=gamma, beta_coint=beta, residual_cov=cov,
    )


def forecast_vec(model: VecModel, history, m: int, origin: int = 0) -> ForecastPath:
    """Forecast in levels via the exact levels-VAR representation."""
    history = np.asarray(history, dtype=float)
    if history.shape != (model.p, model.K):
        raise ValueError(f"history must be ({model.p}, {model.K}), got {history.shape}")
    if m < 1:
        raise ValueError(f"horizon must be >= 1, got {m}")
    if not np.all(np.isfinite(history)):
        raise ValueError("history contains non-finite values")
    A = model.levels_coefficients()
    return ForecastPath(origin=origin, horizon=m, values=_recurse(model.alpha, A, history, m))


def difference(Y) -> np.ndarray:
    """First difference along the time axis."""
    Y = np.asarray(Y, dtype=float)
    if Y.shape[0] < 2:
        raise ValueError("need at least 2 observations to difference")
    if not np.all(np.isfinite(Y)):
        raise ValueError("input contains non-finite values")
    return np.diff(Y, axis=0)


def integrate(last_level, deltas) -> np.ndarray:
    """Exact inverse of `difference`: cumulative sums anchored at last_level."""
    deltas = np.asarray(deltas, dtype=float)
    last_level = np.asarray(last_level, dtype=float)
    if not (np.all(np.isfinite(deltas)) and np.all(np.isfinite(last_level))):
        raise ValueError("input contains non-finite values")
    return last_level + np.cumsum(deltas, axis=0)


def model_to_json(model: VarModel | VecModel) -> str:
    return json.dumps(model.to_json_dict(), indent=2)
