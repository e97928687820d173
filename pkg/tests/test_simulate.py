"""Tests for the synthetic scenario generator and shipped presets."""

import numpy as np
import pytest

from ohlc_forecast.bars import transform_series
from ohlc_forecast.simulate import ScenarioSpec, UnstableModelError, generate, load_preset


def simple_spec(seed=0, noise_scale=0.05):
    return ScenarioSpec(
        p=1,
        T_raw=120,
        burn_in=20,
        Y1=np.array([4.0, 0.7, -0.85, 0.0]),
        A=np.array([0.55 * np.eye(4) + 0.12 * (np.ones((4, 4)) - np.eye(4)) / 3]),
        noise_cov=noise_scale**2 * np.eye(4),
        seed=seed,
    )


class TestScenarioSpec:
    def test_unstable_rejected(self):
        with pytest.raises(UnstableModelError):
            ScenarioSpec(
                p=1, T_raw=100, burn_in=10, Y1=np.zeros(2),
                A=np.array([[[1.05, 0.0], [0.0, 0.5]]]), noise_cov=np.eye(2) * 0.01,
            )

    def test_bad_burn_in(self):
        with pytest.raises(ValueError):
            ScenarioSpec(
                p=1, T_raw=50, burn_in=50, Y1=np.zeros(2),
                A=np.array([0.5 * np.eye(2)]), noise_cov=np.eye(2) * 0.01,
            )

    def test_json_roundtrip(self):
        spec = simple_spec(seed=7)
        back = ScenarioSpec.from_json_dict(spec.to_json_dict())
        assert back.seed == 7 and back.p == spec.p and back.T_raw == spec.T_raw
        assert np.array_equal(np.asarray(back.A), np.asarray(spec.A))

    def test_with_seed(self):
        assert simple_spec(seed=1).with_seed(9).seed == 9

    def test_asymmetric_cov_rejected(self):
        cov = np.eye(4) * 0.01
        cov[0, 1] = 0.5
        with pytest.raises(ValueError):
            ScenarioSpec(
                p=1, T_raw=100, burn_in=10, Y1=np.zeros(4),
                A=np.array([0.5 * np.eye(4)]), noise_cov=cov,
            )


class TestGenerate:
    def test_lengths_and_validity(self):
        spec = simple_spec()
        Y, series = generate(spec)
        assert Y.shape == (100, 4)
        assert len(series) == 100
        for bar in series:
            assert bar.low > 0 and bar.low < bar.high
            assert bar.low <= bar.open <= bar.high
            assert bar.low <= bar.close <= bar.high

    def test_bars_match_transformed_matrix(self):
        Y, series = generate(simple_spec(seed=3))
        back = transform_series(series)
        assert np.abs(back - Y).max() < 1e-9

    def test_seed_determinism(self):
        Y1, s1 = generate(simple_spec(seed=5))
        Y2, s2 = generate(simple_spec(seed=5))
        assert np.array_equal(Y1, Y2)
        assert [b.as_tuple() for b in s1] == [b.as_tuple() for b in s2]

    def test_different_seeds_differ(self):
        Y1, _ = generate(simple_spec(seed=5))
        Y2, _ = generate(simple_spec(seed=6))
        assert not np.array_equal(Y1, Y2)

    def test_zero_noise_is_deterministic_decay(self):
        spec = simple_spec(noise_scale=0.0)
        Y, _ = generate(spec)
        A = np.asarray(spec.A)[0]
        # after burn-in the recursion must satisfy Y_t = A Y_{t-1} exactly
        assert np.abs(Y[1:] - Y[:-1] @ A.T).max() < 1e-12

    def test_non_positive_definite_cov_rejected(self):
        cov = np.eye(4) * 0.01
        cov[3, 3] = -0.01
        spec = ScenarioSpec(
            p=1, T_raw=100, burn_in=10, Y1=np.zeros(4),
            A=np.array([0.5 * np.eye(4)]), noise_cov=cov,
        )
        with pytest.raises(ValueError):
            generate(spec)


class TestPresets:
    def test_all_three_load_and_generate(self):
        specs = [load_preset(i) for i in (1, 2, 3)]
        for spec in specs:
            assert spec.p == 1 and spec.burn_in == 20
            Y, series = generate(spec.with_seed(1))
            assert len(series) == spec.T_raw - spec.burn_in

    def test_noise_ordering(self):
        # scenario 2 is noisier than 1, scenario 3 quieter than 1
        covs = [np.asarray(load_preset(i).noise_cov) for i in (1, 2, 3)]
        assert np.trace(covs[1]) > np.trace(covs[0]) > np.trace(covs[2])

    def test_shared_dynamics(self):
        A = [np.asarray(load_preset(i).A) for i in (1, 2, 3)]
        assert np.array_equal(A[0], A[1]) and np.array_equal(A[0], A[2])

    def test_unknown_preset(self):
        with pytest.raises(KeyError):
            load_preset(4)
