import json

import numpy as np
import pytest
from conftest import simulate_arma
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from retailcast.arima import (
    ARIMA,
    ArimaOrder,
    AutoARIMA,
    diagnostics,
    fit_arima,
    forecast_arima,
    grid_search_arima,
)
from retailcast.core import TimeSeries
from retailcast.exceptions import ConvergenceError, InvalidArgumentError


class TestOrder:
    def test_bounds(self):
        with pytest.raises(InvalidArgumentError):
            ArimaOrder(6, 0, 0)
        with pytest.raises(InvalidArgumentError):
            ArimaOrder(-1, 0, 0)
        with pytest.raises(InvalidArgumentError):
            ArimaOrder(1.5, 0, 0)
        assert tuple(ArimaOrder(1, 1, 1)) == (1, 1, 1)
        assert str(ArimaOrder(1, 2, 0)) == "ARIMA(1,2,0)"


class TestFit:
    def test_white_mean_closed_form(self, rng):
        x = rng.normal(3.0, 2.0, 300)
        fit = fit_arima(x, (0, 0, 0))
        assert fit.c == pytest.approx(x.mean(), rel=1e-12)
        assert fit.sigma2 == pytest.approx(x.var(), rel=1e-12)

    def test_aic_identity(self, rng):
        fit = fit_arima(rng.normal(size=200), (1, 0, 1))
        assert fit.aic == pytest.approx(2 * (1 + 1 + 2) - 2 * fit.loglik, rel=1e-14)

    def test_residual_length(self, rng):
        x = np.cumsum(rng.normal(size=150))
        fit = fit_arima(x, (1, 1, 1))
        assert len(fit.residuals) == 149

    def test_ar_matches_least_squares(self):
        # CSS for a pure AR model is ordinary least squares on lagged values
        x = simulate_arma(phi=(0.5, -0.3), n=800, c=1.0, seed=11)
        X = np.column_stack([np.ones(798), x[1:-1], x[:-2]])
        beta = np.linalg.lstsq(X, x[2:], rcond=None)[0]
        fit = fit_arima(x, (2, 0, 0))
        np.testing.assert_allclose([fit.c, *fit.phi], beta, atol=2e-4)

    def test_ar1_recovery(self):
        fit = fit_arima(simulate_arma(phi=(0.7,), n=2000, seed=1), (1, 0, 0))
        assert 0.62 <= fit.phi[0] <= 0.78

    def test_ma1_recovery(self):
        fit = fit_arima(simulate_arma(theta=(0.5,), n=2000, seed=2), (0, 0, 1))
        assert 0.40 <= fit.theta[0] <= 0.60

    def test_ma_residual_recursion(self):
        # residuals obey e_t = x_t - c - theta e_{t-1} with e_0 = 0 (recomputed by hand)
        x = simulate_arma(theta=(0.4,), n=300, seed=5)
        fit = fit_arima(x, (0, 0, 1))
        e = np.zeros(300)
        for t in range(1, 300):
            e[t] = x[t] - fit.c - fit.theta[0] * e[t - 1]
        np.testing.assert_allclose(fit.residuals[1:], e[1:], atol=1e-9)

    def test_too_short(self):
        with pytest.raises(InvalidArgumentError):
            fit_arima(np.arange(11.0), (1, 1, 1))

    def test_convergence_error_carries_best(self):
        x = simulate_arma(phi=(0.5,), theta=(0.3,), n=300, seed=4)
        with pytest.raises(ConvergenceError) as info:
            fit_arima(x, (2, 0, 2), max_iter=3)
        assert info.value.best is not None
        assert np.isfinite(info.value.best.aic)

    def test_stationarity_flag(self):
        fit = fit_arima(simulate_arma(phi=(0.5,), n=400, seed=8), (1, 0, 0))
        assert fit.stationary and fit.invertible and not fit.flagged

    def test_constant_series_fits(self):
        fit = fit_arima(np.full(60, 4.0), (0, 1, 0))
        assert np.isfinite(fit.aic)
        assert np.all(forecast_arima(fit, 5).mean == 4.0)


class TestGridSearch:
    def test_white_noise(self):
        x = np.random.default_rng(0).normal(size=1000)
        order, _, grid = grid_search_arima(x, return_grid=True)
        assert order.d == 0 and order.p + order.q <= 1
        assert len(grid) == 27

    def test_random_walk(self):
        x = np.cumsum(np.random.default_rng(3).normal(size=1000))
        order, _ = grid_search_arima(x)
        assert order.d >= 1

    def test_selected_aic_is_minimal(self):
        x = simulate_arma(phi=(0.6,), n=300, seed=9)
        order, best, grid = grid_search_arima(x, return_grid=True)
        fits = [f for f in grid.values() if not isinstance(f, Exception)]
        regular = [f for f in fits if not f.flagged] or fits
        assert all(best.aic <= f.aic for f in regular)
        assert best.order == order

    def test_deterministic_across_jobs(self):
        x = simulate_arma(phi=(0.6,), n=200, seed=10)
        o1, f1 = grid_search_arima(x, 1, 1, 1, n_jobs=1)
        o2, f2 = grid_search_arima(x, 1, 1, 1, n_jobs=2)
        assert o1 == o2 and f1.aic == f2.aic

    def test_bad_max(self):
        with pytest.raises(InvalidArgumentError):
            grid_search_arima(np.zeros(100), p_max=7)


class TestForecast:
    def test_random_walk_forecast(self, rng):
        x = np.cumsum(rng.normal(size=100))
        fit = fit_arima(x, (0, 1, 0))
        fit0 = type(fit)(**{**fit.__dict__, "c": 0.0})
        fc = forecast_arima(fit0, 28)
        assert len(fc) == 28
        assert np.all(fc.mean == x[-1])

    def test_ar1_closed_form(self):
        x = simulate_arma(phi=(0.7,), n=500, c=2.0, seed=12)
        fit = fit_arima(x, (1, 0, 0))
        mu = fit.c / (1 - fit.phi[0])
        h = np.arange(1, 11)
        expected = mu + fit.phi[0] ** h * (x[-1] - mu)
        np.testing.assert_allclose(forecast_arima(fit, 10).mean, expected, rtol=1e-10)

    def test_white_forecast_is_intercept(self, rng):
        fit = fit_arima(rng.normal(size=50), (0, 0, 0))
        assert np.all(forecast_arima(fit, 7).mean == fit.c)

    def test_differencing_inversion(self):
        x = np.cumsum(simulate_arma(phi=(0.5,), n=300, seed=13))
        fit = fit_arima(x, (1, 1, 0))
        diffed_fit = fit_arima(np.diff(x), (1, 0, 0))
        fit_same = type(diffed_fit)(**{**diffed_fit.__dict__, "c": fit.c, "phi": fit.phi})
        levels = x[-1] + np.cumsum(forecast_arima(fit_same, 12).mean)
        np.testing.assert_allclose(forecast_arima(fit, 12).mean, levels, rtol=1e-12)

    def test_interval_random_walk(self, rng):
        # psi weights of a random walk are all one, so the h-step variance is h sigma2
        fit = fit_arima(np.cumsum(rng.normal(size=200)), (0, 1, 0))
        fc = forecast_arima(fit, 4)
        half = (fc.upper - fc.lower) / 2
        np.testing.assert_allclose(half, 1.959963984540054 * np.sqrt(fit.sigma2 * np.arange(1, 5)), rtol=1e-9)

    def test_bad_h(self, rng):
        with pytest.raises(InvalidArgumentError):
            forecast_arima(fit_arima(rng.normal(size=50), (0, 0, 0)), 0)


class TestDiagnostics:
    def test_white_band_and_variance(self):
        x = simulate_arma(phi=(0.7,), n=2000, seed=14)
        fit = fit_arima(x, (1, 0, 0))
        d = diagnostics(fit)
        n = len(d.standardized_residuals)
        assert np.sum(np.abs(d.residual_acf[1:21]) < 2 / np.sqrt(n)) >= 18
        assert 0.8 <= np.var(d.standardized_residuals) <= 1.2
        assert d.histogram_counts.sum() == n
        assert len(d.histogram_counts) == 20

    def test_serialisation(self):
        fit = fit_arima(simulate_arma(phi=(0.3,), n=200, seed=15), (1, 0, 0))
        d = diagnostics(fit)
        payload = json.loads(d.to_json())
        assert len(payload["residual_acf"]) == len(d.residual_acf)
        assert d.to_csv().splitlines()[0]

    def test_too_few(self, rng):
        fit = fit_arima(rng.normal(size=15), (0, 0, 0))
        with pytest.raises(InvalidArgumentError):
            diagnostics(fit)


class TestEstimators:
    def test_params_and_clone(self):
        est = ARIMA(order=(2, 1, 0))
        assert est.get_params() == {"order": (2, 1, 0), "max_iter": 2000}
        assert clone(est).order == (2, 1, 0)

    def test_keeps_best_iterate_when_capped(self):
        x = simulate_arma(phi=(0.5,), theta=(0.3,), n=300, seed=4)
        est = ARIMA(order=(2, 0, 2), max_iter=3).fit(x)
        assert not est.converged_
        assert len(est.predict(4)) == 4

    def test_not_fitted(self):
        with pytest.raises(NotFittedError):
            ARIMA().predict(3)

    def test_auto(self):
        x = simulate_arma(phi=(0.6,), n=200, seed=16)
        est = AutoARIMA(max_p=1, max_d=1, max_q=1).fit(x)
        assert len(est.predict(5)) == 5
        assert est.aic_ == est.fit_.aic
        assert isinstance(est.fit_.series, TimeSeries)


def test_grid_candidates_share_the_scored_days():
    x = np.cumsum(np.random.default_rng(17).normal(size=120))
    _, _, grid = grid_search_arima(x, 1, 2, 1, return_grid=True)
    lengths = {len(f.effective_residuals) for f in grid.values() if not isinstance(f, Exception)}
    assert lengths == {120 - 3}


def test_conditioning_bounds(rng):
    with pytest.raises(InvalidArgumentError):
        fit_arima(rng.normal(size=50), (1, 0, 0), n_condition=0)
