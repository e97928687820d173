"""Forecast evaluation: the five accuracy measures, the naive baseline,
and the one-sided paired comparison between methods.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import stats as sps

from .bars import OhlcBar, OhlcSeries

PRICES = ("open", "high", "low", "close")


class MetricInputError(ValueError):
    """Inputs violate a metric's preconditions."""


def _paired(actual, forecast, min_len: int = 1) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(actual, dtype=float).ravel()
    f = np.asarray(forecast, dtype=float).ravel()
    if a.size != f.size:
        raise MetricInputError(f"length mismatch: {a.size} vs {f.size}")
    if a.size < min_len:
        raise MetricInputError(f"need at least {min_len} points, got {a.size}")
    return a, f


def mape(actual, forecast) -> float:
    """Mean absolute percentage error, in percent."""
    a, f = _paired(actual, forecast)
    if np.any(a == 0.0):
        raise MetricInputError("MAPE undefined for zero actual values")
    return float(100.0 * np.mean(np.abs((a - f) / a)))


def sd_of_forecasts(forecast) -> float:
    """Sample standard deviation of the forecasted values (k-1 denominator)."""
    f = np.asarray(forecast, dtype=float).ravel()
    if f.size < 2:
        raise MetricInputError(f"SD needs at least 2 points, got {f.size}")
    return float(np.std(f, ddof=1))


def rmse(actual, forecast) -> float:
    """Root mean squared error."""
    a, f = _paired(actual, forecast)
    return float(np.sqrt(np.mean((a - f) ** 2)))


def _interval_distance(a_low, a_high, f_low, f_high) -> np.ndarray:
    mid = np.abs((a_high + a_low) / 2.0 - (f_high + f_low) / 2.0)
    half = np.abs((a_high - a_low) / 2.0 - (f_high - f_low) / 2.0)
    return mid + half


def rmseh(actual_bars: Sequence[OhlcBar], forecast_bars: Sequence[OhlcBar]) -> float:
    """RMSE of the Hausdorff-style [low, high] interval distance."""
    if len(actual_bars) != len(forecast_bars) or not actual_bars:
        raise MetricInputError("need equal-length nonempty bar sequences")
    al = np.array([b.low for b in actual_bars])
    ah = np.array([b.high for b in actual_bars])
    fl = np.array([b.low for b in forecast_bars])
    fh = np.array([b.high for b in forecast_bars])
    d = _interval_distance(al, ah, fl, fh)
    return float(np.sqrt(np.mean(d**2)))


def interval_overlap_ratios(
    actual_bars: Sequence[OhlcBar], forecast_bars: Sequence[OhlcBar]
) -> np.ndarray:
    """Per-period intersection-over-union of the [low, high] intervals."""
    if len(actual_bars) != len(forecast_bars) or not actual_bars:
        raise MetricInputError("need equal-length nonempty bar sequences")
    al = np.array([b.low for b in actual_bars])
    ah = np.array([b.high for b in actual_bars])
    fl = np.array([b.low for b in forecast_bars])
    fh = np.array([b.high for b in forecast_bars])
    inter = np.maximum(np.minimum(ah, fh) - np.maximum(al, fl), 0.0)
    union = (ah - al) + (fh - fl) - inter
    out = np.zeros(len(actual_bars))
    ok = (inter > 0.0) & (union > 0.0)
    out[ok] = inter[ok] / union[ok]
    return out


def accuracy_ratio(actual_bars: Sequence[OhlcBar], forecast_bars: Sequence[OhlcBar]) -> float:
    """Mean interval IoU; disjoint periods contribute zero."""
    return float(np.mean(interval_overlap_ratios(actual_bars, forecast_bars)))


@dataclass(frozen=True)
class EvalReport:
    """All five measures for one set of forecast/actual bar pairs."""

    k: int
    mape: dict[str, float]
    sd: dict[str, float]
    rmse: dict[str, float]
    rmseh: float
    ar: float

    def to_json_dict(self) -> dict:
        return {
            "k": self.k,
            "mape_pct": self.mape,
            "sd": self.sd,
            "rmse": self.rmse,
            "rmseh": self.rmseh,
            "ar": self.ar,
        }


def evaluate(actual_bars: Sequence[OhlcBar], forecast_bars: Sequence[OhlcBar]) -> EvalReport:
    """Compute the full measurement suite on paired bars."""
    if len(actual_bars) != len(forecast_bars) or not actual_bars:
        raise MetricInputError("need equal-length nonempty bar sequences")
    m_map, s_map, r_map = {}, {}, {}
    for price in PRICES:
        a = [getattr(b, price) for b in actual_bars]
        f = [getattr(b, price) for b in forecast_bars]
        m_map[price] = mape(a, f)
        s_map[price] = sd_of_forecasts(f) if len(f) >= 2 else 0.0
        r_map[price] = rmse(a, f)
    return EvalReport(
        k=len(actual_bars),
        mape=m_map,
        sd=s_map,
        rmse=r_map,
        rmseh=rmseh(actual_bars, forecast_bars),
        ar=accuracy_ratio(actual_bars, forecast_bars),
    )


def naive_forecast(series: OhlcSeries, m: int) -> list[OhlcBar]:
    """Carry the last observed bar forward for every horizon up to m."""
    if m < 1:
        raise MetricInputError(f"horizon must be >= 1, got {m}")
    if len(series) <= m:
        raise MetricInputError(f"series of {len(series)} too short for horizon {m}")
    last = series.bars[-1]
    return [
        OhlcBar(t=last.t + h, open=last.open, high=last.high, low=last.low, close=last.close)
        for h in range(1, m + 1)
    ]


@dataclass(frozen=True)
class ComparisonEntry:
    """One metric's paired one-sided t-test between proposed and naive."""

    metric: str
    proposed: float
    naive: float
    t_statistic: float
    p_value: float
    significant: bool


@dataclass(frozen=True)
class ComparisonReport:
    """Table-style comparison of the proposed method against the baseline."""

    proposed: EvalReport
    naive: EvalReport
    entries: tuple[ComparisonEntry, ...] = field(default_factory=tuple)

    def to_json_dict(self) -> dict:
        return {
            "proposed": self.proposed.to_json_dict(),
            "naive": self.naive.to_json_dict(),
            "tests": [
                {
                    "metric": e.metric,
                    "proposed": e.proposed,
                    "naive": e.naive,
                    "t_statistic": e.t_statistic,
                    "p_value": e.p_value,
                    "significant_at_1pct": e.significant,
                }
                for e in self.entries
            ],
        }


def compare_one_sided(
    proposed_errors, naive_errors, higher_is_better: bool = False, alpha: float = 0.01
) -> tuple[float, float, bool]:
    """Paired one-sided t-test on per-period samples.

    Null: the proposed method is no better than the naive one. Returns
    (t statistic, p-value, significant). Exact ties report p = 1 and no flag.
    """
    p_arr, n_arr = _paired(proposed_errors, naive_errors, min_len=10)
    d = (n_arr - p_arr) if not higher_is_better else (p_arr - n_arr)
    sd = d.std(ddof=1)
    if sd == 0.0:
        return 0.0, 1.0, False
    t_stat = float(d.mean() / (sd / np.sqrt(d.size)))
    p_value = float(sps.t.sf(t_stat, df=d.size - 1))
    return t_stat, p_value, p_value < alpha


def compare_methods(
    actual_bars: Sequence[OhlcBar],
    proposed_bars: Sequence[OhlcBar],
    naive_bars: Sequence[OhlcBar],
    alpha: float = 0.01,
) -> ComparisonReport:
    """Build the full proposed-vs-naive comparison with per-metric tests."""
    prop_report = evaluate(actual_bars, proposed_bars)
    naive_report = evaluate(actual_bars, naive_bars)
    entries = []
    for price in PRICES:
        a = np.array([getattr(b, price) for b in actual_bars])
        f_p = np.array([getattr(b, price) for b in proposed_bars])
        f_n = np.array([getattr(b, price) for b in naive_bars])
        ape_p = np.abs((a - f_p) / a)
        ape_n = np.abs((a - f_n) / a)
        t, pv, sig = compare_one_sided(ape_p, ape_n)
        entries.append(
            ComparisonEntry(
                f"mape_{price}", prop_report.mape[price], naive_report.mape[price], t, pv, sig
            )
        )
        t, pv, sig = compare_one_sided((a - f_p) ** 2, (a - f_n) ** 2)
        entries.append(
            ComparisonEntry(
                f"rmse_{price}", prop_report.rmse[price], naive_report.rmse[price], t, pv, sig
            )
        )
    al = np.array([b.low for b in actual_bars])
    ah = np.array([b.high for b in actual_bars])
    d_p = _interval_distance(
        al, ah, np.array([b.low for b in proposed_bars]), np.array([b.high for b in proposed_bars])
    )
    d_n = _interval_distance(
        al, ah, np.array([b.low for b in naive_bars]), np.array([b.high for b in naive_bars])
    )
    t, pv, sig = compare_one_sided(d_p**2, d_n**2)
    entries.append(ComparisonEntry("rmseh", prop_report.rmseh, naive_report.rmseh, t, pv, sig))
    iou_p = interval_overlap_ratios(actual_bars, proposed_bars)
    iou_n = interval_overlap_ratios(actual_bars, naive_bars)
    t, pv, sig = compare_one_sided(iou_p, iou_n, higher_is_better=True)
    entries.append(ComparisonEntry("ar", prop_report.ar, naive_report.ar, t, pv, sig))
    return ComparisonReport(proposed=prop_report, naive=naive_report, entries=tuple(entries))
