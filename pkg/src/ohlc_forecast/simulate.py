"""Synthetic OHLC generation: a seeded VAR recursion in transformed space,
burn-in removal, and inverse transformation to constraint-valid bars.

The three shipped scenario presets share one stable coefficient matrix and
differ only in the innovation noise level (medium / low / high
signal-to-noise ratio).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .bars import OhlcSeries, TransformedVector, inverse_transform


class UnstableModelError(ValueError):
    """Coefficient matrices imply an explosive recursion."""


@dataclass(frozen=True)
class ScenarioSpec:
    """Generator parameters for one synthetic scenario."""

    p: int
    T_raw: int
    burn_in: int
    Y1: np.ndarray  # (K,)
    A: np.ndarray  # (p, K, K)
    noise_cov: np.ndarray  # (K, K)
    seed: int = 0

    def __post_init__(self):
        A = np.asarray(self.A, dtype=float)
        K = A.shape[1]
        if A.shape != (self.p, K, K):
            raise ValueError(f"A must be ({self.p}, {K}, {K}), got {A.shape}")
        cov = np.asarray(self.noise_cov, dtype=float)
        if cov.shape != (K, K) or not np.allclose(cov, cov.T):
            raise ValueError("noise_cov must be a symmetric (K, K) matrix")
        if self.burn_in < 0 or self.burn_in >= self.T_raw:
            raise ValueError("burn_in must be in [0, T_raw)")
        if _companion_spectral_radius(A) >= 1.0:
            raise UnstableModelError("companion spectral radius must be < 1")

    @property
    def K(self) -> int:
        return np.asarray(self.A).shape[1]

    def with_seed(self, seed: int) -> "ScenarioSpec":
        return ScenarioSpec(self.p, self.T_raw, self.burn_in, self.Y1, self.A, self.noise_cov, seed)

    def to_json_dict(self) -> dict:
        return {
            "p": self.p,
            "T_raw": self.T_raw,
            "burn_in": self.burn_in,
            "Y1": np.asarray(self.Y1).tolist(),
            "A": np.asarray(self.A).tolist(),
            "noise_cov": np.asarray(self.noise_cov).tolist(),
            "seed": self.seed,
        }

    @staticmethod
    def from_json_dict(d: dict) -> "ScenarioSpec":
        return ScenarioSpec(
            p=int(d["p"]),
            T_raw=int(d["T_raw"]),
            burn_in=int(d["burn_in"]),
            Y1=np.asarray(d["Y1"], dtype=float),
            A=np.asarray(d["A"], dtype=float),
            noise_cov=np.asarray(d["noise_cov"], dtype=float),
            seed=int(d.get("seed", 0)),
        )


def _companion_spectral_radius(A: np.ndarray) -> float:
    p, K = A.shape[0], A.shape[1]
    comp = np.zeros((K * p, K * p))
    comp[:K] = np.hstack(list(A))
    if p > 1:
        comp[K:, : K * (p - 1)] = np.eye(K * (p - 1))
    return float(np.max(np.abs(np.linalg.eigvals(comp))))


def generate(spec: ScenarioSpec) -> tuple[np.ndarray, OhlcSeries]:
    """Simulate the transformed series and its OHLC image.

    Uses numpy's PCG64 generator seeded from spec.seed; innovations are the
    Cholesky factor of noise_cov applied to iid standard normals. Returns
    the post-burn-in transformed matrix and the matching bar series.
    """
    rng = np.random.default_rng(spec.seed)
    K, p = spec.K, spec.p
    try:
        L = np.linalg.cholesky(np.asarray(spec.noise_cov, dtype=float)) if np.any(
            spec.noise_cov
        ) else np.zeros((K, K))
    except np.linalg.LinAlgError as exc:
        raise ValueError("noise_cov is not positive definite") from exc

    A = np.asarray(spec.A, dtype=float)
    Y = np.zeros((spec.T_raw, K))
    Y[0] = np.asarray(spec.Y1, dtype=float)
    # additional initial lags for p > 1 are zero vectors
    shocks = rng.standard_normal((spec.T_raw, K)) @ L.T
    for t in range(1, spec.T_raw):
        y = shocks[t].copy()
        for j in range(1, p + 1):
            if t - j >= 0:
                y += A[j - 1] @ Y[t - j]
        Y[t] = y

    kept = Y[spec.burn_in :]
    bars = [
        inverse_transform(TransformedVector(*row), t=i + 1, label=str(i + 1))
        for i, row in enumerate(kept)
    ]
    return kept, OhlcSeries(tuple(bars))


def load_preset(name: int | str) -> ScenarioSpec:
    """Load one of the shipped scenario presets (1, 2, or 3)."""
    key = str(name)
    if key not in {"1", "2", "3"}:
        raise KeyError(f"unknown scenario {name!r}; valid presets: 1, 2, 3")
    path = resources.files("ohlc_forecast.scenarios").joinpath(f"scenario{key}.json")
    return ScenarioSpec.from_json_dict(json.loads(path.read_text()))
