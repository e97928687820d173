"""Tests for the OHLC data model, sanitization, and the transform pair."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ohlc_forecast.bars import (
    BoundaryBarError,
    InvalidBarError,
    OhlcBar,
    OhlcSeries,
    RawBar,
    SanitizeConfig,
    TransformOverflowError,
    TransformedVector,
    inverse_transform,
    read_csv,
    sanitize_series,
    transform,
    write_csv,
)


def assert_valid(bar):
    assert bar.low > 0
    assert bar.low < bar.high
    assert bar.low <= bar.open <= bar.high
    assert bar.low <= bar.close <= bar.high


class TestOhlcBar:
    def test_valid_bar(self):
        assert_valid(OhlcBar(1, 2.0, 3.0, 1.0, 2.5))

    @pytest.mark.parametrize(
        "o,h,l,c",
        [
            (2.0, 3.0, 0.0, 2.5),  # low not positive
            (2.0, 1.0, 1.0, 1.0),  # high not above low
            (0.5, 3.0, 1.0, 2.5),  # open below low
            (2.0, 3.0, 1.0, 3.5),  # close above high
        ],
    )
    def test_invalid_bars(self, o, h, l, c):
        with pytest.raises(InvalidBarError):
            OhlcBar(1, o, h, l, c)

    def test_series_requires_contiguous_indices(self):
        b1 = OhlcBar(1, 2, 3, 1, 2)
        b3 = OhlcBar(3, 2, 3, 1, 2)
        with pytest.raises(InvalidBarError):
            OhlcSeries((b1, b3))


class TestTransform:
    def test_centered_bar_maps_to_zero(self):
        v = transform(OhlcBar(1, 1.5, 2.0, 1.0, 1.5))
        assert v.as_array() == pytest.approx([0.0, 0.0, 0.0, 0.0])

    def test_symmetric_midpoint(self):
        v = transform(OhlcBar(1, 2.0, 3.0, 1.0, 2.0))
        assert v.as_array() == pytest.approx([0.0, math.log(2.0), 0.0, 0.0])

    def test_quartile_positions(self):
        # lambda_open = 0.75, lambda_close = 0.25
        v = transform(OhlcBar(1, 2.5, 3.0, 1.0, 1.5))
        assert v.as_array() == pytest.approx([0.0, math.log(2.0), math.log(3.0), -math.log(3.0)])

    def test_boundary_bar_rejected(self):
        with pytest.raises(BoundaryBarError):
            transform(OhlcBar(1, 1.0, 3.0, 1.0, 2.0))
        with pytest.raises(BoundaryBarError):
            transform(OhlcBar(1, 2.0, 3.0, 1.0, 3.0))

    def test_near_boundary_rejected(self):
        low, high = 1.0, 2.0
        open_ = low + (high - low) * 1e-14
        with pytest.raises(BoundaryBarError):
            transform(OhlcBar(1, open_, high, low, 1.5))


class TestInverseTransform:
    def test_zero_vector(self):
        bar = inverse_transform(TransformedVector(0, 0, 0, 0))
        assert bar.as_tuple() == pytest.approx((1.5, 2.0, 1.0, 1.5))

    def test_saturated_open_at_low(self):
        bar = inverse_transform(TransformedVector(0.0, math.log(2.0), -100.0, 0.0))
        assert bar.open == pytest.approx(1.0, abs=1e-10)
        assert bar.close == pytest.approx(2.0)
        assert bar.high == pytest.approx(3.0)

    def test_overflow_reported(self):
        with pytest.raises(TransformOverflowError):
            inverse_transform(TransformedVector(701.0, 0.0, 0.0, 0.0))
        with pytest.raises(TransformOverflowError):
            inverse_transform(TransformedVector(0.0, 701.0, 0.0, 0.0))

    def test_underflowed_range_still_valid(self):
        bar = inverse_transform(TransformedVector(50.0, -50.0, 0.0, 0.0))
        assert_valid(bar)

    @given(
        y=st.tuples(
            st.floats(-50, 50), st.floats(-50, 50), st.floats(-50, 50), st.floats(-50, 50)
        )
    )
    @settings(max_examples=300)
    def test_total_constraint_safety(self, y):
        assert_valid(inverse_transform(TransformedVector(*y)))

    def test_monotone_in_open_position(self):
        opens = [
            inverse_transform(TransformedVector(0.0, 1.0, y3, 0.0)).open
            for y3 in np.linspace(-5, 5, 21)
        ]
        assert all(a < b for a, b in zip(opens, opens[1:]))

    def test_monotone_in_log_low(self):
        bars = [
            inverse_transform(TransformedVector(y1, 1.0, 0.3, -0.2))
            for y1 in np.linspace(-2, 2, 9)
        ]
        for a, b in zip(bars, bars[1:]):
            assert b.low > a.low and b.high > a.high
            assert b.open > a.open and b.close > a.close


@st.composite
def interior_bars(draw):
    low = draw(st.floats(0.01, 1e4))
    span = draw(st.floats(1e-3, 1e3))
    lam_o = draw(st.floats(0.001, 0.999))
    lam_c = draw(st.floats(0.001, 0.999))
    high = low + span
    return OhlcBar(1, low + lam_o * span, high, low, low + lam_c * span)


class TestRoundtrip:
    @given(bar=interior_bars())
    @settings(max_examples=300)
    def test_roundtrip_identity(self, bar):
        back = inverse_transform(transform(bar))
        for name in ("open", "high", "low", "close"):
            a, b = getattr(bar, name), getattr(back, name)
            assert abs(a - b) <= 1e-10 * abs(a)


class TestSanitize:
    CFG = SanitizeConfig(rng_seed=42)

    def test_suspension_bar_removed(self):
        series = sanitize_series([(0, 0, 0, 0), (2, 3, 1, 2.5)], self.CFG)
        assert len(series) == 1

    def test_open_at_low_perturbed_into_band(self):
        series = sanitize_series([(1, 3, 1, 2)], self.CFG)
        bar = series[0]
        assert 1.0 < bar.open <= 1.0 + 0.01 * 2.0
        assert bar.close == 2.0
        assert_valid(bar)

    def test_close_at_high_perturbed(self):
        series = sanitize_series([(2, 3, 1, 3)], self.CFG)
        bar = series[0]
        assert 3.0 - 0.02 <= bar.close < 3.0
        assert_valid(bar)

    def test_interior_bar_unchanged(self):
        series = sanitize_series([(2, 3, 1, 2.5)], self.CFG)
        assert series[0].as_tuple() == (2, 3, 1, 2.5)

    def test_limit_up_bar_widened(self):
        # prior close below the limit price, so the 1.1 factor goes on close/high
        series = sanitize_series([(2, 3, 1, 2.5), (5, 5, 5, 5)], self.CFG)
        bar = series[1]
        assert bar.low == 5.0
        assert bar.high == pytest.approx(5.5)
        assert_valid(bar)
        v = transform(bar)  # must be strictly interior now
        assert np.all(np.isfinite(v.as_array()))

    def test_limit_down_bar_widened(self):
        series = sanitize_series([(20, 21, 19, 20), (10, 10, 10, 10)], self.CFG)
        bar = series[1]
        assert bar.low == 10.0
        assert bar.high == pytest.approx(11.0)
        # open was scaled by 1.1; close stays near the low boundary after perturbation
        assert bar.close < bar.open
        assert_valid(bar)

    def test_determinism(self):
        raw = [(1, 3, 1, 3), (0, 0, 0, 0), (5, 5, 5, 5), (2, 4, 1, 3)]
        a = sanitize_series(raw, self.CFG)
        b = sanitize_series(raw, self.CFG)
        assert [x.as_tuple() for x in a] == [y.as_tuple() for y in b]

    def test_idempotence(self):
        raw = [(1, 3, 1, 3), (5, 5, 5, 5), (2, 4, 1, 3), (1, 2, 1, 1)]
        once = sanitize_series(raw, self.CFG)
        twice = sanitize_series(once.bars, self.CFG)
        assert [x.as_tuple() for x in once] == [y.as_tuple() for y in twice]

    def test_high_below_low_rejected(self):
        with pytest.raises(InvalidBarError):
            sanitize_series([(2, 1, 3, 2)], self.CFG)

    def test_empty_after_filtering_rejected(self):
        with pytest.raises(InvalidBarError):
            sanitize_series([(0, 0, 0, 0)], self.CFG)

    def test_reindexing_contiguous(self):
        series = sanitize_series([(2, 3, 1, 2.5), (0, 0, 0, 0), (2, 4, 1, 3)], self.CFG)
        assert [b.t for b in series] == [1, 2]


class TestCsvRoundtrip:
    def test_write_read(self, tmp_path):
        series = sanitize_series([(2, 3, 1, 2.5), (2.5, 4, 2, 3)], SanitizeConfig(rng_seed=1))
        path = tmp_path / "series.csv"
        write_csv(series, path)
        raw = read_csv(path)
        assert [(r.open, r.high, r.low, r.close) for r in raw] == [
            b.as_tuple() for b in series
        ]
        assert isinstance(raw[0], RawBar)

    def test_bad_header_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("time,o,h,l,c\n1,2,3,1,2\n")
        with pytest.raises(InvalidBarError):
            read_csv(path)

    def test_empty_file_rejected(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("date,open,high,low,close\n")
        with pytest.raises(InvalidBarError):
            read_csv(path)
