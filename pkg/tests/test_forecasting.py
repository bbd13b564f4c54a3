"""Feature assembly contracts and the baseline predictors."""

import numpy as np
import pytest

from rampkit.errors import SingularSystemError
from rampkit.forecasting import (
    FeatureMatrix,
    assemble_features,
    fit_predict_linear,
    mse_objective,
    predict_persistence,
    rank_nwp_features,
)
from rampkit.matching import MatchRecord
from rampkit.metrics import rmse
from rampkit.ramps import RampDefinition, RampEvent, make_segment
from rampkit.series import EPOCH, FeatureTable, WindSeries


def small_table(n=40, seed=0):
    rng = np.random.default_rng(seed)
    speed = 5.0 + np.cumsum(rng.normal(0, 0.2, n))
    speed = np.clip(speed, 0.5, None)
    power = 0.4 * speed
    return FeatureTable(
        columns={
            "wind_speed_mps": WindSeries(speed, kind="speed"),
            "power_mw": WindSeries(power, kind="power"),
            "nwp_speed_70m": WindSeries(speed + rng.normal(0, 0.1, n), kind="nwp-feature"),
            "nwp_temp_70m": WindSeries(15 - 0.3 * speed, kind="nwp-feature"),
        },
        target="power_mw",
    )


def pipeline_state(n=40, seed=0, fired=(True, False)):
    """Table plus hand-built segments/matches/events and a historical pair."""
    table = small_table(n, seed)
    speed = table["wind_speed_mps"].values
    mid = n // 2
    segs = [
        make_segment(speed, 0, mid, table.step),
        make_segment(speed, mid, n - 1, table.step),
    ]
    matches = [
        MatchRecord(past_segment=seg, hist_start=10 + 3 * i, dtw_distance=1.0,
                    wind_str=0.5, wind_tre=0.1, wind_str_norm=0.5,
                    wind_tre_norm=0.1, omega=0.26 + 0.1 * i)
        for i, seg in enumerate(segs)
    ]
    events = [
        RampEvent(segment=seg, definition=RampDefinition.RF, threshold_used=1.0,
                  fired=flag)
        for seg, flag in zip(segs, fired)
    ]
    rng = np.random.default_rng(seed + 1)
    hist_speed = WindSeries(rng.uniform(3, 9, 3 * n), kind="speed")
    hist_power = WindSeries(0.4 * hist_speed.values, kind="power")
    return table, matches, events, hist_speed, hist_power


class TestRankNwpFeatures:
    def test_identical_column_ranks_first(self):
        table = small_table()
        new = dict(table.columns)
        new["nwp_clone"] = table["power_mw"].with_values(
            table["power_mw"].values, kind="nwp-feature"
        )
        ranked = rank_nwp_features(FeatureTable(columns=new, target="power_mw"), "power_mw")
        assert ranked[0][0] in ("nwp_clone", "wind_speed_mps")
        assert ranked[0][1] == pytest.approx(1.0)

    def test_anticorrelated_ranks_last(self):
        table = small_table()
        ranked = rank_nwp_features(table, "power_mw")
        assert ranked[-1][0] == "nwp_temp_70m"
        assert ranked[-1][1] == pytest.approx(-1.0)

    def test_constant_column_correlates_zero(self):
        table = small_table()
        new = dict(table.columns)
        new["nwp_flat"] = table["power_mw"].with_values(
            np.full(len(table), 7.0), kind="nwp-feature"
        )
        ranked = dict(rank_nwp_features(FeatureTable(columns=new), "power_mw"))
        assert ranked["nwp_flat"] == 0.0


class TestAssembleFeatures:
    def test_target_is_future_power(self):
        table, matches, events, hs, hp = pipeline_state()
        matrix = assemble_features(matches, events, table, hs, hp,
                                   lags=(1,), horizon=1)
        power = table["power_mw"].values
        for t, target in zip(matrix.origin_index, matrix.y):
            assert target == power[t + 1]
        assert np.array_equal(matrix.origin_power, power[matrix.origin_index])

    def test_ramp_flag_follows_fired_segment(self):
        table, matches, events, hs, hp = pipeline_state(fired=(True, False))
        matrix = assemble_features(matches, events, table, hs, hp,
                                   lags=(1,), horizon=1)
        col = matrix.feature_names.index("ramp_fired")
        mid = len(table) // 2
        for row, t in enumerate(matrix.origin_index):
            expected = 1.0 if t < mid else 0.0
            assert matrix.X[row, col] == expected

    def test_warmup_rows_dropped(self):
        table, matches, events, hs, hp = pipeline_state()
        matrix = assemble_features(matches, events, table, hs, hp,
                                   lags=(1, 5), horizon=2)
        assert matrix.origin_index[0] == 4  # max_lag - 1
        assert matrix.origin_index[-1] <= len(table) - 1 - 2

    def test_deterministic_assembly(self):
        table, matches, events, hs, hp = pipeline_state()
        m1 = assemble_features(matches, events, table, hs, hp)
        m2 = assemble_features(matches, events, table, hs, hp)
        assert np.array_equal(m1.X, m2.X)
        assert np.array_equal(m1.y, m2.y)

    def test_columns_normalized_no_nan(self):
        table, matches, events, hs, hp = pipeline_state()
        matrix = assemble_features(matches, events, table, hs, hp)
        assert np.isfinite(matrix.X).all()
        assert matrix.X.min() >= 0.0 and matrix.X.max() <= 1.0

    def test_nwp_taken_at_target_time(self):
        table, matches, events, hs, hp = pipeline_state()
        matrix = assemble_features(matches, events, table, hs, hp,
                                   lags=(1,), horizon=3, k_nwp=1)
        name = next(n for n in matrix.feature_names if n.startswith("nwp_"))
        col = matrix.feature_names.index(name)
        raw = table[name.replace("_t+h", "")].values[matrix.origin_index + 3]
        spread = raw.max() - raw.min()
        expected = (raw - raw.min()) / spread
        assert np.allclose(matrix.X[:, col], expected)

    def test_drop_features_keeps_rows(self):
        table, matches, events, hs, hp = pipeline_state()
        matrix = assemble_features(matches, events, table, hs, hp)
        reduced = matrix.drop_features(("omega", "rho", "matched_power", "matched_speed",
                                        "ramp_fired"))
        assert len(reduced) == len(matrix)
        assert "omega" not in reduced.feature_names
        assert np.array_equal(reduced.y, matrix.y)


def constant_power_matrix(n=30, value=2.0):
    X = np.linspace(0, 1, n).reshape(-1, 1)
    return FeatureMatrix(
        X=X, feature_names=("power_lag1",),
        y=np.full(n, value), origin_power=np.full(n, value),
        origin_index=np.arange(n), horizon=1, capacity=5.0,
        start_time=EPOCH, step=900.0,
    )


class TestPersistence:
    def test_constant_series_zero_error(self):
        report = predict_persistence(constant_power_matrix())
        assert report.metrics.rmse == 0.0

    def test_step_change_error_at_change_row(self):
        power = np.array([1.0] * 10 + [3.0] * 10)
        matrix = FeatureMatrix(
            X=np.zeros((19, 1)), feature_names=("power_lag1",),
            y=power[1:], origin_power=power[:-1],
            origin_index=np.arange(19), horizon=1, capacity=5.0,
            start_time=EPOCH, step=900.0,
        )
        report = predict_persistence(matrix)
        errors = np.abs(report.predictions - report.actuals)
        assert errors[9] == pytest.approx(2.0)
        assert np.count_nonzero(errors) == 1

    def test_clamped_to_capacity(self):
        matrix = FeatureMatrix(
            X=np.zeros((5, 1)), feature_names=("power_lag1",),
            y=np.full(5, 4.0), origin_power=np.array([6.0, 7.0, 8.0, 1.0, 2.0]),
            origin_index=np.arange(5), horizon=1, capacity=5.0,
            start_time=EPOCH, step=900.0,
        )
        report = predict_persistence(matrix)
        assert report.predictions.max() <= 5.0
        assert report.predictions.min() >= 0.0


class TestRidge:
    def linear_matrix(self, n=80, noise=0.0, seed=0):
        rng = np.random.default_rng(seed)
        X = rng.uniform(0, 1, size=(n, 3))
        beta = np.array([1.5, -0.7, 2.0])
        y = X @ beta + 0.5 + noise * rng.normal(size=n)
        return FeatureMatrix(
            X=X, feature_names=("a", "b", "c"),
            y=np.clip(y, 0, None), origin_power=np.zeros(n),
            origin_index=np.arange(n), horizon=1, capacity=10.0,
            start_time=EPOCH, step=900.0,
        )

    def test_exact_linear_target_recovered(self):
        report = fit_predict_linear(self.linear_matrix(), ridge_lambda=0.0, split=0.5)
        assert rmse(report.predictions, report.actuals) < 1e-8

    def test_huge_lambda_predicts_training_mean(self):
        matrix = self.linear_matrix(noise=0.1)
        report = fit_predict_linear(matrix, ridge_lambda=1e12, split=0.5)
        train_mean = matrix.y[:40].mean()
        assert np.allclose(report.predictions, train_mean, atol=1e-3)

    def test_deterministic(self):
        matrix = self.linear_matrix(noise=0.3)
        r1 = fit_predict_linear(matrix, ridge_lambda=1.0, split=0.6)
        r2 = fit_predict_linear(matrix, ridge_lambda=1.0, split=0.6)
        assert np.array_equal(r1.predictions, r2.predictions)
        assert np.isfinite(r1.predictions).all()

    def test_singular_system_surfaced(self):
        matrix = self.linear_matrix()
        X = np.column_stack([matrix.X[:, 0], matrix.X[:, 0]])  # duplicate column
        singular = FeatureMatrix(
            X=X, feature_names=("a", "a_dup"),
            y=matrix.y, origin_power=matrix.origin_power,
            origin_index=matrix.origin_index, horizon=1, capacity=10.0,
            start_time=EPOCH, step=900.0,
        )
        with pytest.raises(SingularSystemError):
            fit_predict_linear(singular, ridge_lambda=0.0, split=0.5)
        # a positive penalty regularizes the same system
        report = fit_predict_linear(singular, ridge_lambda=1.0, split=0.5)
        assert np.isfinite(report.predictions).all()

    def test_chronological_split_no_leak(self):
        matrix = self.linear_matrix()
        report = fit_predict_linear(matrix, split=0.7)
        n_train = int(np.floor(len(matrix) * 0.7))
        assert len(report.predictions) == len(matrix) - n_train
        train_max = matrix.target_times()[n_train - 1]
        assert min(report.target_times) > train_max

    def test_predictions_clamped(self):
        matrix = self.linear_matrix(noise=0.0)
        low_cap = FeatureMatrix(
            X=matrix.X, feature_names=matrix.feature_names,
            y=matrix.y, origin_power=matrix.origin_power,
            origin_index=matrix.origin_index, horizon=1, capacity=1.0,
            start_time=EPOCH, step=900.0,
        )
        report = fit_predict_linear(low_cap, ridge_lambda=0.0, split=0.5)
        assert report.predictions.max() <= 1.0


class TestMseObjective:
    def test_values(self):
        assert mse_objective([1.0, 2.0], [1.0, 2.0]) == 0.0
        assert mse_objective([0.0, 0.0], [1.0, 3.0]) == pytest.approx(5.0)

    def test_equals_rmse_squared(self):
        rng = np.random.default_rng(4)
        a, b = rng.normal(size=20), rng.normal(size=20)
        assert mse_objective(a, b) == pytest.approx(rmse(a, b) ** 2)
