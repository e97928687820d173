"""Constrained OHLC data model, sanitization, and the unconstraining transform.

The transform maps a valid candlestick bar to an unrestricted real 4-vector
(log low, log range, logit of the open/close positions inside the range).
Its inverse is total: any finite 4-vector maps back to a bar that satisfies
all OHLC constraints, which is what makes unconstrained forecasting safe.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

# lambda values closer than this to 0 or 1 are treated as boundary cases
BOUNDARY_TOL = 1e-12

# exp() guard: beyond this the result is not representable in float64
EXP_LIMIT = 700.0


class InvalidBarError(ValueError):
    """Raw bar violates a constraint that sanitization cannot repair."""


class BoundaryBarError(ValueError):
    """Bar sits on a constraint boundary; sanitize before transforming."""


class TransformOverflowError(OverflowError):
    """Inverse transform would overflow float64 (divergent forecast)."""


@dataclass(frozen=True)
class OhlcBar:
    """One period's open-high-low-close prices.

    Enforces the three candlestick constraints on construction:
    low > 0, low < high, and open/close within [low, high].
    """

    t: int
    open: float
    high: float
    low: float
    close: float
    label: str | None = None

    def __post_init__(self):
        if self.t < 1:
            raise InvalidBarError(f"period index must be >= 1, got {self.t}")
        if not all(math.isfinite(v) for v in (self.open, self.high, self.low, self.close)):
            raise InvalidBarError(f"non-finite price in bar t={self.t}")
        if self.low <= 0:
            raise InvalidBarError(f"low must be positive, got {self.low} at t={self.t}")
        if self.low >= self.high:
            raise InvalidBarError(f"low {self.low} must be below high {self.high} at t={self.t}")
        for name in ("open", "close"):
            v = getattr(self, name)
            if not (self.low <= v <= self.high):
                raise InvalidBarError(
                    f"{name} {v} outside [low, high] = [{self.low}, {self.high}] at t={self.t}"
                )

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.open, self.high, self.low, self.close)


@dataclass(frozen=True)
class RawBar:
    """Unvalidated candidate bar, as read from a CSV or a market feed."""

    open: float
    high: float
    low: float
    close: float
    label: str | None = None


@dataclass(frozen=True)
class OhlcSeries:
    """Ordered OHLC series with contiguous period indices 1..T."""

    bars: tuple[OhlcBar, ...]

    def __post_init__(self):
        if not self.bars:
            raise InvalidBarError("series must contain at least one bar")
        for i, bar in enumerate(self.bars):
            if bar.t != i + 1:
                raise InvalidBarError(f"indices must be contiguous from 1; bar {i} has t={bar.t}")

    def __len__(self) -> int:
        return len(self.bars)

    def __iter__(self):
        return iter(self.bars)

    def __getitem__(self, i):
        return self.bars[i]

    def to_array(self) -> np.ndarray:
        """(T, 4) array of (open, high, low, close) rows."""
        return np.array([b.as_tuple() for b in self.bars], dtype=float)

    @staticmethod
    def from_array(prices: np.ndarray, labels: Sequence[str] | None = None) -> "OhlcSeries":
        """Build a series from (T, 4) rows of (open, high, low, close)."""
        bars = []
        for i, row in enumerate(np.asarray(prices, dtype=float)):
            label = labels[i] if labels is not None else None
            bars.append(OhlcBar(i + 1, row[0], row[1], row[2], row[3], label=label))
        return OhlcSeries(tuple(bars))


@dataclass(frozen=True)
class TransformedVector:
    """Unconstrained image (y1, y2, y3, y4) of a bar under the transform."""

    y1: float
    y2: float
    y3: float
    y4: float

    def __post_init__(self):
        for name in ("y1", "y2", "y3", "y4"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite, got {getattr(self, name)}")

    def as_array(self) -> np.ndarray:
        return np.array([self.y1, self.y2, self.y3, self.y4], dtype=float)


@dataclass(frozen=True)
class SanitizeConfig:
    """Controls the perturbations used to push boundary bars interior.

    The random term is drawn uniformly from (0.001, epsilon_fraction] times
    the bar range, so it is economically negligible but keeps the logit
    coordinates comfortably finite.
    """

    epsilon_fraction: float = 0.01
    limit_factor: float = 1.1
    rng_seed: int = 0

    def __post_init__(self):
        if not (0.0 < self.epsilon_fraction <= 0.05):
            raise ValueError(f"epsilon_fraction must be in (0, 0.05], got {self.epsilon_fraction}")
        if self.limit_factor != 1.1:
            raise ValueError("limit_factor is fixed at 1.1")


def _lam(price: float, low: float, high: float) -> float:
    return (price - low) / (high - low)


def transform(bar: OhlcBar) -> TransformedVector:
    """Map a strictly interior bar to its unconstrained 4-vector.

    Raises BoundaryBarError when open or close sits on (or numerically at)
    the low/high boundary; callers must sanitize such bars first.
    """
    rng = bar.high - bar.low
    lam_o = _lam(bar.open, bar.low, bar.high)
    lam_c = _lam(bar.close, bar.low, bar.high)
    for name, lam in (("open", lam_o), ("close", lam_c)):
        if lam <= BOUNDARY_TOL or lam >= 1.0 - BOUNDARY_TOL:
            raise BoundaryBarError(
                f"{name} position lambda={lam} at t={bar.t} is on the boundary; sanitize first"
            )
    return TransformedVector(
        y1=math.log(bar.low),
        y2=math.log(rng),
        y3=math.log(lam_o / (1.0 - lam_o)),
        y4=math.log(lam_c / (1.0 - lam_c)),
    )


def _sigmoid(y: float) -> float:
    # numerically stable on both tails; saturates to exactly 0.0 / 1.0
    if y >= 0:
        return 1.0 / (1.0 + math.exp(-y))
    e = math.exp(y)
    return e / (1.0 + e)


def inverse_transform(vec: TransformedVector, t: int = 1, label: str | None = None) -> OhlcBar:
    """Map any finite 4-vector back to a constraint-valid bar.

    The output satisfies all three OHLC constraints exactly, for every
    finite input; overflow of exp() is reported rather than emitting inf.
    """
    if abs(vec.y1) > EXP_LIMIT or vec.y2 > EXP_LIMIT:
        raise TransformOverflowError(
            f"components (y1={vec.y1}, y2={vec.y2}) exceed the exp() range; forecast diverged"
        )
    low = math.exp(vec.y1)
    high = low + math.exp(vec.y2)
    if math.isinf(high):
        raise TransformOverflowError("high overflows float64; forecast diverged")
    if high <= low:
        # exp(y2) underflowed relative to low; open the smallest valid range
        high = math.nextafter(low, math.inf)
    lam_o = _sigmoid(vec.y3)
    lam_c = _sigmoid(vec.y4)
    opn = min(max(lam_o * high + (1.0 - lam_o) * low, low), high)
    cls = min(max(lam_c * high + (1.0 - lam_c) * low, low), high)
    return OhlcBar(t=t, open=opn, high=high, low=low, close=cls, label=label)


def transform_series(series: OhlcSeries) -> np.ndarray:
    """Transform every bar; returns the (T, 4) matrix of y-vectors."""
    return np.array([transform(b).as_array() for b in series.bars])


def inverse_transform_path(vectors: np.ndarray, start_t: int = 1) -> list[OhlcBar]:
    """Inverse-transform each row of a (m, 4) forecast path."""
    out = []
    for h, row in enumerate(np.asarray(vectors, dtype=float)):
        out.append(inverse_transform(TransformedVector(*row), t=start_t + h))
    return out


def sanitize_series(raw: Iterable[RawBar | tuple], cfg: SanitizeConfig) -> OhlcSeries:
    """Repair boundary bars and drop suspension bars from a raw series.

    Applies, in order: (1) removal of all-zero suspension bars, (4) widening
    of one-price limit bars by the 1.1 factor, then (2)/(3) seeded random
    perturbation of open/close values sitting on the low/high boundary.
    Idempotent: a sanitized series passes through unchanged.
    """
    rng = np.random.default_rng(cfg.rng_seed)
    bars: list[OhlcBar] = []
    prev_close: float | None = None
    for item in raw:
        if isinstance(item, OhlcBar):
            o, h, l, c, label = item.open, item.high, item.low, item.close, item.label
        elif isinstance(item, RawBar):
            o, h, l, c, label = item.open, item.high, item.low, item.close, item.label
        else:
            o, h, l, c = (float(v) for v in item[:4])
            label = item[4] if len(item) > 4 else None

        if o == h == l == c == 0.0:
            continue  # trade suspension
        if min(o, h, l, c) < 0:
            raise InvalidBarError(f"negative price in raw bar {label or len(bars) + 1}")
        if h < l:
            raise InvalidBarError(f"high {h} below low {l} in raw bar {label or len(bars) + 1}")

        if o == h == l == c:
            # one-price limit bar: widen, biased by the move off the prior close
            if prev_close is None or c >= prev_close:
                c *= cfg.limit_factor
            else:
                o *= cfg.limit_factor
            h *= cfg.limit_factor

        if l <= 0:
            raise InvalidBarError(f"non-positive low {l} in raw bar {label or len(bars) + 1}")
        if not (l <= o <= h) or not (l <= c <= h):
            raise InvalidBarError(
                f"open/close outside [low, high] in raw bar {label or len(bars) + 1}"
            )

        span = h - l
        eps_lo = min(1e-3, cfg.epsilon_fraction / 2.0)
        for name in ("o", "c"):
            v = o if name == "o" else c
            lam = _lam(v, l, h)
            if lam <= BOUNDARY_TOL:
                v = l + rng.uniform(eps_lo, cfg.epsilon_fraction) * span
            elif lam >= 1.0 - BOUNDARY_TOL:
                v = h - rng.uniform(eps_lo, cfg.epsilon_fraction) * span
            if name == "o":
                o = v
            else:
                c = v

        bars.append(OhlcBar(t=len(bars) + 1, open=o, high=h, low=l, close=c, label=label))
        prev_close = c

    if not bars:
        raise InvalidBarError("no bars remain after removing suspension periods")
    return OhlcSeries(tuple(bars))


CSV_HEADER = ["date", "open", "high", "low", "close"]


def read_csv(path) -> list[RawBar]:
    """Read raw bars from a `date,open,high,low,close` CSV."""
    out = []
    with open(path, newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None:
            raise InvalidBarError(f"{path}: empty CSV")
        if [h.strip().lower() for h in header] != CSV_HEADER:
            raise InvalidBarError(f"{path}: expected header {','.join(CSV_HEADER)}")
        for row in reader:
            if not row:
                continue
            out.append(
                RawBar(
                    open=float(row[1]),
                    high=float(row[2]),
                    low=float(row[3]),
                    close=float(row[4]),
                    label=row[0],
                )
            )
    if not out:
        raise InvalidBarError(f"{path}: no data rows")
    return out


def write_csv(series: OhlcSeries, path) -> None:
    """Write a series in the `date,open,high,low,close` format."""
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(CSV_HEADER)
        for bar in series.bars:
            writer.writerow(
                [
                    bar.label if bar.label is not None else str(bar.t),
                    repr(bar.open),
                    repr(bar.high),
                    repr(bar.low),
                    repr(bar.close),
                ]
            )
