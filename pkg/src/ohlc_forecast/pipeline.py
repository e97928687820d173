"""Rolling-window orchestration: stationarity routing, model fitting,
forecasting, and inverse transformation back to constraint-valid bars.

Each window runs the same decision tree: ADF on every component; if all are
stationary fit a VAR, otherwise consult the Johansen rank. A positive
partial rank yields a VEC; full rank falls back to a levels VAR; rank zero
differences the non-stationary components once, fits a VAR on the mixed
system, and integrates the differenced components back.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, replace

import numpy as np

from .bars import (
    OhlcBar,
    OhlcSeries,
    SanitizeConfig,
    TransformOverflowError,
    inverse_transform_path,
    sanitize_series,
    transform_series,
)
from .stattests import SeriesTooShortError, SingularMomentError, adf_test, johansen_trace_test
from .varvec import (
    RankDeficientError,
    fit_var,
    fit_vec,
    forecast_var,
    forecast_vec,
    integrate,
    select_lag_aic,
)

MODEL_VAR = "VAR"
MODEL_VEC = "VEC"
MODEL_DIFF_VAR = "DIFF_VAR"


class WindowFailedError(RuntimeError):
    """Window could not be modelled even after the fallbacks."""


@dataclass(frozen=True)
class PipelineConfig:
    """Knobs shared by every window of a backtest."""

    alpha_adf: float = 0.05
    alpha_johansen: float = 0.05
    p_max: int | None = None
    sanitize: SanitizeConfig = field(default_factory=SanitizeConfig)


@dataclass(frozen=True)
class WindowSpec:
    """Rolling-window geometry: q in-sample periods, m-step horizon."""

    q: int
    m: int

    def __post_init__(self):
        if self.q < 30:
            raise ValueError(f"window length must be >= 30, got {self.q}")
        if not 1 <= self.m <= 10:
            raise ValueError(f"horizon must be in [1, 10], got {self.m}")


@dataclass(frozen=True)
class WindowForecast:
    """Outcome of one window: model route, forecasts, and realized bars."""

    window_index: int
    model_used: str
    p: int
    r: int | None
    forecast_bars: tuple[OhlcBar, ...]
    realized_bars: tuple[OhlcBar, ...]


@dataclass(frozen=True)
class BacktestResult:
    """All window outcomes for one (q, m) setting."""

    spec: WindowSpec
    windows: tuple[WindowForecast, ...]
    failed_indices: tuple[int, ...]
    model_counts: dict[str, int]

    def forecast_bars_at(self, horizon: int) -> list[OhlcBar]:
        return [w.forecast_bars[horizon - 1] for w in self.windows]

    def realized_bars_at(self, horizon: int) -> list[OhlcBar]:
        return [w.realized_bars[horizon - 1] for w in self.windows]

    def to_json_dict(self) -> dict:
        return {
            "q": self.spec.q,
            "m": self.spec.m,
            "model_counts": self.model_counts,
            "failed_indices": list(self.failed_indices),
            "windows": [
                {
                    "window_index": w.window_index,
                    "model": w.model_used,
                    "p": w.p,
                    "r": w.r,
                    "forecast": [b.as_tuple() for b in w.forecast_bars],
                    "realized": [b.as_tuple() for b in w.realized_bars],
                }
                for w in self.windows
            ],
        }

    def write_json(self, path) -> None:
        with open(path, "w") as f:
            json.dump(self.to_json_dict(), f, indent=2)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(
                ["window_index", "model", "p", "r", "horizon",
                 "o_hat", "h_hat", "l_hat", "c_hat", "o", "h", "l", "c"]
            )
            for w in self.windows:
                for h, (fb, rb) in enumerate(zip(w.forecast_bars, w.realized_bars), start=1):
                    writer.writerow(
                        [w.window_index, w.model_used, w.p, "" if w.r is None else w.r, h,
                         *(repr(v) for v in fb.as_tuple()), *(repr(v) for v in rb.as_tuple())]
                    )


@dataclass(frozen=True)
class WindowOutcome:
    """Internal record before realized bars are attached."""

    model_used: str
    p: int
    r: int | None
    forecast_vectors: np.ndarray  # (m, K) transformed space


def _forecast_mixed(window: np.ndarray, nonstationary: np.ndarray, m: int,
                    p_max: int | None) -> tuple[np.ndarray, int]:
    """Rank-0 branch: difference flagged components, fit, integrate back."""
    mixed = window[1:].copy()
    mixed[:, nonstationary] = np.diff(window[:, nonstationary], axis=0)
    p = select_lag_aic(mixed, p_max)
    model = fit_var(mixed, p)
    path = forecast_var(model, mixed[-p:], m)
    values = path.values.copy()
    last_levels = window[-1, nonstationary]
    values[:, nonstationary] = integrate(last_levels, path.values[:, nonstationary])
    return values, p


def run_window(window: np.ndarray, m: int, cfg: PipelineConfig) -> WindowOutcome:
    """Route one transformed window through the modelling decision tree."""
    window = np.asarray(window, dtype=float)
    q, K = window.shape

    try:
        adf = [adf_test(window[:, i], cfg.alpha_adf) for i in range(K)]
        stationary = np.array([res.reject_unit_root for res in adf])

        if stationary.all():
            p = select_lag_aic(window, cfg.p_max)
            model = fit_var(window, p)
            path = forecast_var(model, window[-p:], m)
            return WindowOutcome(MODEL_VAR, p, None, path.values)

        p = select_lag_aic(window, cfg.p_max)
        jres = johansen_trace_test(window, p, cfg.alpha_johansen)
        r = jres.selected_rank

        if 0 < r < K:
            model = fit_vec(window, p, r, beta=jres.eigenvectors[:, :r])
            path = forecast_vec(model, window[-p:], m)
            return WindowOutcome(MODEL_VEC, p, r, path.values)

        if r == K:
            model = fit_var(window, p)
            path = forecast_var(model, window[-p:], m)
            return WindowOutcome(MODEL_VAR, p, r, path.values)

        # r == 0: one differencing round on the non-stationary components
        values, p_used = _forecast_mixed(window, ~stationary, m, cfg.p_max)
        return WindowOutcome(MODEL_DIFF_VAR, p_used, 0, values)

    except (RankDeficientError, SingularMomentError, SeriesTooShortError, ValueError):
        # fallback: minimal-lag VAR on levels; beyond that the window fails
        try:
            model = fit_var(window, 1)
            path = forecast_var(model, window[-1:], m)
            return WindowOutcome(MODEL_VAR, 1, None, path.values)
        except (RankDeficientError, ValueError) as exc:
            raise WindowFailedError(f"window unmodellable: {exc}") from exc


def _window_task(args) -> tuple[int, WindowOutcome | None]:
    i, window, m, cfg = args
    try:
        return i, run_window(window, m, cfg)
    except WindowFailedError:
        return i, None


def rolling_backtest(
    series: OhlcSeries, spec: WindowSpec, cfg: PipelineConfig | None = None, workers: int = 1
) -> BacktestResult:
    """Slide the q-window over the series, forecasting m steps at each origin.

    Sanitizes and transforms once; the forecast at origin t only ever sees
    data up to t. Failed windows are excluded from metrics but tallied.
    Windows are independent; with workers > 1 they run in parallel and are
    re-ordered by index, so results do not depend on the worker count.
    """
    cfg = cfg or PipelineConfig()
    clean = sanitize_series(series.bars, cfg.sanitize)
    T = len(clean)
    if T < spec.q + spec.m:
        raise ValueError(f"series of {T} too short for q={spec.q}, m={spec.m}")

    Y = transform_series(clean)
    n_windows = T - spec.q - spec.m + 1

    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        tasks = ((i, Y[i : i + spec.q], spec.m, cfg) for i in range(n_windows))
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = dict(pool.map(_window_task, tasks, chunksize=16))
    else:
        outcomes = dict(
            _window_task((i, Y[i : i + spec.q], spec.m, cfg)) for i in range(n_windows)
        )

    windows: list[WindowForecast] = []
    failed: list[int] = []
    counts: dict[str, int] = {MODEL_VAR: 0, MODEL_VEC: 0, MODEL_DIFF_VAR: 0}
    for i in range(n_windows):
        outcome = outcomes[i]
        if outcome is None:
            failed.append(i)
            continue
        try:
            forecast_bars = inverse_transform_path(
                outcome.forecast_vectors, start_t=i + spec.q + 1
            )
        except TransformOverflowError:
            failed.append(i)
            continue
        realized = clean.bars[i + spec.q : i + spec.q + spec.m]
        counts[outcome.model_used] += 1
        windows.append(
            WindowForecast(
                window_index=i,
                model_used=outcome.model_used,
                p=outcome.p,
                r=outcome.r,
                forecast_bars=tuple(forecast_bars),
                realized_bars=tuple(realized),
            )
        )
    return BacktestResult(
        spec=spec,
        windows=tuple(windows),
        failed_indices=tuple(failed),
        model_counts=counts,
    )


def naive_window_forecasts(
    series: OhlcSeries, spec: WindowSpec, cfg: PipelineConfig | None = None
) -> list[tuple[OhlcBar, ...]]:
    """Last-bar-carried-forward forecasts aligned with rolling_backtest windows."""
    cfg = cfg or PipelineConfig()
    clean = sanitize_series(series.bars, cfg.sanitize)
    T = len(clean)
    out = []
    for i in range(T - spec.q - spec.m + 1):
        last = clean.bars[i + spec.q - 1]
        out.append(tuple(replace(last, t=last.t + h) for h in range(1, spec.m + 1)))
    return out
