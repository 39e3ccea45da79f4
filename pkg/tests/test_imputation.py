import datetime as dt
import math

import numpy as np
import pytest

from solarcast.data import DailySeries, DataError, HourlySeries, Provenance, SeriesUnit
from solarcast.imputation import (
    TempModel,
    TempModelCoeffs,
    evaluate_imputation,
    fit_temp_model,
    impute_daily,
    impute_hourly,
)

START = dt.date(2015, 1, 1)


def kc_series(values):
    values = np.asarray(values, dtype=np.float64)
    flags = np.where(np.isnan(values), Provenance.MISSING,
                     Provenance.MEASURED).astype(np.int8)
    return HourlySeries(start_date=START, values=values, flags=flags,
                        unit=SeriesUnit.KC)


def daily_series(h, t_max, t_min):
    h = np.asarray(h, dtype=np.float64)
    flags = np.where(np.isnan(h), Provenance.MISSING,
                     Provenance.MEASURED).astype(np.int8)
    return DailySeries(start_date=START, values=h, flags=flags,
                       t_max=np.asarray(t_max, dtype=np.float64),
                       t_min=np.asarray(t_min, dtype=np.float64))


class TestHourlyRules:
    def test_first_day_fill(self):
        grid = np.full((2, 13), 0.7)
        grid[0, 4] = np.nan
        grid[0, 0] = np.nan
        out = impute_hourly(kc_series(grid))
        assert out.values[0, 4] == 1.0
        assert out.values[0, 0] == 1.0
        assert out.flags[0, 4] == Provenance.IMPUTED

    def test_interior_rule(self):
        # missing 10 h: prev-day 10 h = 0.6, current 9 h = 0.4, current 11 h = 0.5
        grid = np.full((2, 13), 0.9)
        grid[0, 4] = 0.6
        grid[1, 3] = 0.4
        grid[1, 5] = 0.5
        grid[1, 4] = np.nan
        out = impute_hourly(kc_series(grid))
        assert out.values[1, 4] == pytest.approx((0.6 + 0.4 + 0.5) / 3, abs=1e-15)

    def test_interior_rule_next_missing(self):
        grid = np.full((2, 13), 0.9)
        grid[0, 4] = 0.6
        grid[1, 3] = 0.4
        grid[1, 4] = np.nan
        grid[1, 5] = np.nan
        out = impute_hourly(kc_series(grid))
        # 11 h was missing when 10 h was filled, so only two terms enter
        assert out.values[1, 4] == pytest.approx((0.6 + 0.4) / 2, abs=1e-15)
        # 11 h then uses prev-day 11 h (0.9), the fresh 10 h fill, and 12 h (0.9)
        assert out.values[1, 5] == pytest.approx((0.9 + 0.5 + 0.9) / 3, abs=1e-15)

    def test_first_hour_rule(self):
        grid = np.full((2, 13), 0.9)
        grid[0, 0] = 0.3
        grid[1, 1] = 0.7
        grid[1, 0] = np.nan
        out = impute_hourly(kc_series(grid))
        assert out.values[1, 0] == pytest.approx((0.3 + 0.7) / 2, abs=1e-15)

    def test_first_hour_rule_without_next(self):
        grid = np.full((2, 13), 0.9)
        grid[0, 0] = 0.3
        grid[1, 0] = np.nan
        grid[1, 1] = np.nan
        out = impute_hourly(kc_series(grid))
        assert out.values[1, 0] == pytest.approx(0.3, abs=1e-15)

    def test_last_hour_rule(self):
        grid = np.full((2, 13), 0.9)
        grid[1, 11] = 0.2
        grid[0, 12] = 0.4
        grid[1, 12] = np.nan
        out = impute_hourly(kc_series(grid))
        assert out.values[1, 12] == pytest.approx((0.2 + 0.4) / 2, abs=1e-15)

    def test_measured_untouched_and_complete(self):
        rng = np.random.default_rng(3)
        grid = rng.uniform(0.1, 1.0, size=(20, 13))
        mask = rng.random((20, 13)) < 0.35
        grid[mask] = np.nan
        series = kc_series(grid)
        out = impute_hourly(series)
        assert int((out.flags == Provenance.MISSING).sum()) == 0
        measured = series.flags == Provenance.MEASURED
        assert np.array_equal(out.values[measured], series.values[measured])
        assert np.array_equal(out.flags[measured], series.flags[measured])

    def test_imputed_within_input_range(self):
        rng = np.random.default_rng(5)
        grid = rng.uniform(0.3, 0.8, size=(12, 13))
        mask = rng.random((12, 13)) < 0.3
        mask[0] = False
        grid[mask] = np.nan
        out = impute_hourly(kc_series(grid))
        imputed = out.flags == Provenance.IMPUTED
        assert np.all(out.values[imputed] >= 0.3 - 1e-12)
        assert np.all(out.values[imputed] <= 0.8 + 1e-12)

    def test_deterministic(self):
        rng = np.random.default_rng(9)
        grid = rng.uniform(0.1, 1.0, size=(15, 13))
        grid[rng.random((15, 13)) < 0.4] = np.nan
        series = kc_series(grid)
        a = impute_hourly(series)
        b = impute_hourly(series)
        assert np.array_equal(a.values, b.values)

    def test_rejects_irradiance_units(self):
        series = kc_series(np.full((2, 13), 0.5)).replace(unit=SeriesUnit.IRRADIANCE)
        with pytest.raises(ValueError):
            impute_hourly(series)


class TestTempModels:
    def _hs_data(self, a=0.17, n=365, seed=0):
        rng = np.random.default_rng(seed)
        delta = rng.uniform(2.0, 16.0, n)
        t_min = rng.uniform(10.0, 18.0, n)
        h0 = rng.uniform(8000.0, 10000.0, n)
        h = a * np.sqrt(delta) * h0
        return daily_series(h, t_min + delta, t_min), h0

    def test_hs_round_trip(self):
        daily, h0 = self._hs_data(a=0.17)
        coeffs = fit_temp_model(daily, h0, TempModel.HARGREAVES_SAMANI)
        assert coeffs.a == pytest.approx(0.17, abs=1e-6)

    def test_hs_normal_equation_residual(self):
        rng = np.random.default_rng(1)
        daily, h0 = self._hs_data(a=0.2, seed=1)
        noisy = daily.values * (1.0 + rng.normal(0, 0.05, daily.n_days))
        daily = daily.replace(values=noisy)
        coeffs = fit_temp_model(daily, h0, TempModel.HARGREAVES_SAMANI)
        x = np.sqrt(daily.t_max - daily.t_min)
        y = daily.values / h0
        assert abs(float(np.sum((y - coeffs.a * x) * x))) <= 1e-8

    def test_logistic_round_trip(self):
        rng = np.random.default_rng(2)
        n = 365
        delta = rng.uniform(2.0, 16.0, n)
        t_min = rng.uniform(10.0, 18.0, n)
        h0 = rng.uniform(8000.0, 10000.0, n)
        ratio = 1.0 / (1.0 + np.exp(-(-1.0 + 0.15 * delta)))
        daily = daily_series(ratio * h0, t_min + delta, t_min)
        coeffs = fit_temp_model(daily, h0, TempModel.LOGISTIC)
        assert coeffs.a == pytest.approx(-1.0, abs=1e-3)
        assert coeffs.b == pytest.approx(0.15, abs=1e-3)

    def test_logistic_degenerate_constant(self):
        n = 60
        delta = np.linspace(2.0, 12.0, n)
        t_min = np.full(n, 14.0)
        h0 = np.full(n, 9000.0)
        daily = daily_series(0.42 * h0, t_min + delta, t_min)
        coeffs = fit_temp_model(daily, h0, TempModel.LOGISTIC)
        assert coeffs.a == pytest.approx(math.log(0.42 / 0.58), abs=1e-6)
        assert coeffs.b == pytest.approx(0.0, abs=1e-6)

    def test_insufficient_data(self):
        daily, h0 = self._hs_data(n=20)
        with pytest.raises(DataError):
            fit_temp_model(daily, h0, TempModel.HARGREAVES_SAMANI)

    def test_coeff_validation(self):
        with pytest.raises(ValueError):
            TempModelCoeffs(TempModel.HARGREAVES_SAMANI, a=-0.1)
        with pytest.raises(ValueError):
            TempModelCoeffs(TempModel.LOGISTIC, a=float("nan"))


class TestImputeDaily:
    def test_sigmoid_midpoint(self):
        coeffs = TempModelCoeffs(TempModel.LOGISTIC, a=-1.5, b=0.1)
        daily = daily_series([np.nan], t_max=[30.0], t_min=[15.0])
        out, summary = impute_daily(daily, coeffs, np.array([9000.0]))
        assert out.values[0] == pytest.approx(0.5 * 9000.0, rel=1e-12)
        assert summary.n_filled == 1

    def test_hs_arithmetic(self):
        coeffs = TempModelCoeffs(TempModel.HARGREAVES_SAMANI, a=0.1)
        daily = daily_series([np.nan, np.nan], t_max=[30.0, 20.0], t_min=[14.0, 20.0])
        out, _ = impute_daily(daily, coeffs, np.array([9000.0, 9000.0]))
        assert out.values[0] == pytest.approx(0.4 * 9000.0, rel=1e-12)
        assert out.values[1] == 0.0  # zero temperature range

    def test_hs_clipped_to_h0(self):
        coeffs = TempModelCoeffs(TempModel.HARGREAVES_SAMANI, a=0.5)
        daily = daily_series([np.nan], t_max=[30.0], t_min=[21.0])
        out, _ = impute_daily(daily, coeffs, np.array([9000.0]))
        assert out.values[0] == 9000.0

    def test_unfillable_days_remain(self):
        coeffs = TempModelCoeffs(TempModel.LOGISTIC, a=0.0, b=0.1)
        daily = DailySeries(START, np.array([np.nan]),
                            np.array([Provenance.MISSING], dtype=np.int8),
                            t_max=np.array([np.nan]), t_min=np.array([np.nan]))
        out, summary = impute_daily(daily, coeffs, np.array([9000.0]))
        assert summary.n_unfillable == 1
        assert out.flags[0] == Provenance.MISSING


class TestEvaluateImputation:
    def test_constant_series_zero_error(self):
        # at 1.0 even a masked first-day slot reimputes exactly
        grid = np.full((30, 13), 1.0)
        stats = evaluate_imputation(kc_series(grid), 0.2, seed=1, method="hourly")
        assert stats.mae == pytest.approx(0.0, abs=1e-12)
        assert stats.rmse == pytest.approx(0.0, abs=1e-12)
        assert stats.mbe == pytest.approx(0.0, abs=1e-12)

    def test_constant_series_rules_reproduce_constant(self):
        grid = np.full((30, 13), 0.6)
        rng = np.random.default_rng(2)
        mask = rng.random((30, 13)) < 0.3
        mask[0] = False  # the first-day rule fills 1.0 regardless of the data
        holdout = grid.copy()
        holdout[mask] = np.nan
        out = impute_hourly(kc_series(holdout))
        assert np.allclose(out.values[mask], 0.6, atol=1e-12)

    def test_smooth_series_finite_errors(self):
        rng = np.random.default_rng(4)
        grid = 0.5 + 0.2 * np.sin(np.arange(40 * 13) / 9.0).reshape(40, 13)
        grid += rng.normal(0, 0.01, grid.shape)
        stats = evaluate_imputation(kc_series(grid), 0.2, seed=7, method="hourly")
        assert np.isfinite(stats.mae) and stats.mae > 0
        assert np.isfinite(stats.mbe)
        assert stats.n == int(round(0.2 * 40 * 13))

    def test_seed_reproducible(self):
        rng = np.random.default_rng(4)
        grid = rng.uniform(0.2, 0.9, size=(25, 13))
        s1 = evaluate_imputation(kc_series(grid), 0.3, seed=11, method="hourly")
        s2 = evaluate_imputation(kc_series(grid), 0.3, seed=11, method="hourly")
        assert s1 == s2

    def test_daily_methods(self):
        rng = np.random.default_rng(6)
        n = 200
        delta = rng.uniform(2.0, 16.0, n)
        t_min = rng.uniform(10.0, 18.0, n)
        h0 = np.full(n, 9000.0)
        ratio = 1.0 / (1.0 + np.exp(-(-1.0 + 0.15 * delta)))
        daily = daily_series(ratio * h0, t_min + delta, t_min)
        stats = evaluate_imputation(daily, 0.25, seed=3, method="logistic", h0=h0)
        assert stats.mae < 1e-6 * 9000.0  # model-generated data refits exactly
        stats_hs = evaluate_imputation(daily, 0.25, seed=3, method="hs", h0=h0)
        assert np.isfinite(stats_hs.mae)

    def test_fraction_validation(self):
        grid = np.full((30, 13), 0.6)
        for bad in (0.0, 0.6, -0.1):
            with pytest.raises(ValueError):
                evaluate_imputation(kc_series(grid), bad, seed=0, method="hourly")

    def test_nothing_maskable(self):
        grid = np.full((30, 13), np.nan)
        with pytest.raises(DataError):
            evaluate_imputation(kc_series(grid), 0.2, seed=0, method="hourly")
