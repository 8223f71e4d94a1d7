"""ARIMA(p, d, q) by conditional sum of squares, AIC order search,
h-step forecasting and residual diagnostics.

The model on the ``d``-times differenced series ``x`` is

    x_t = c + phi_1 x_{t-1} + ... + phi_p x_{t-p}
              + theta_1 e_{t-1} + ... + theta_q e_{t-q} + e_t

Estimation conditions on the first ``max(p, q)`` differenced values and
sets pre-sample errors to zero, so the likelihood is Gaussian in the
remaining residuals.
"""

import csv
import io
import json
import logging
from dataclasses import dataclass, field

import numpy as np
from joblib import Parallel, delayed
from scipy.signal import lfilter
from scipy.stats import norm
from sklearn.base import BaseEstimator

from ._simplex import nelder_mead
from ._validation import check_is_fitted, check_positive_int
from .core import ForecastResult, TimeSeries, acf, difference
from .exceptions import (
    ConvergenceError,
    DegenerateInputError,
    GridSearchError,
    InvalidArgumentError,
)

logger = logging.getLogger(__name__)

__all__ = [
    "ArimaOrder",
    "ArimaFit",
    "DiagnosticsBundle",
    "fit_arima",
    "grid_search_arima",
    "forecast_arima",
    "diagnostics",
    "ARIMA",
    "AutoARIMA",
]

MAX_ORDER = 5
SIGMA2_FLOOR = 1e-12
MIN_EXTRA_OBS = 10


@dataclass(frozen=True, order=True)
class ArimaOrder:
    p: int
    d: int
    q: int

    def __post_init__(self):
        for name in ("p", "d", "q"):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value or not 0 <= value <= MAX_ORDER:
                raise InvalidArgumentError(
                    f"ARIMA order {name} must be an integer in [0, {MAX_ORDER}], got {value!r}"
                )
            object.__setattr__(self, name, int(value))

    @classmethod
    def coerce(cls, order):
        return order if isinstance(order, cls) else cls(*order)

    def __iter__(self):
        return iter((self.p, self.d, self.q))

    def __str__(self):
        return f"ARIMA({self.p},{self.d},{self.q})"


@dataclass(frozen=True)
class ArimaFit:
    """Fitted ARIMA parameters together with the history needed to forecast."""

    order: ArimaOrder
    c: float
    phi: np.ndarray
    theta: np.ndarray
    sigma2: float
    loglik: float
    aic: float
    residuals: np.ndarray
    n_conditioned: int
    series: TimeSeries
    stationary: bool = True
    invertible: bool = True
    n_iter: int = 0

    @property
    def flagged(self):
        """True when the AR part is non-stationary or the MA part non-invertible."""
        return not (self.stationary and self.invertible)

    @property
    def n_params(self):
        return self.order.p + self.order.q + 2

    @property
    def effective_residuals(self):
        """Residuals after the conditioning prefix."""
        return self.residuals[self.n_conditioned:]


def _roots_outside_unit_circle(poly_low_first):
    """``poly_low_first`` = [1, a_1, ..., a_k] for 1 + a_1 z + ... + a_k z^k."""
    coeffs = np.trim_zeros(np.asarray(poly_low_first, dtype=float), "b")
    if coeffs.shape[0] <= 1:
        return True
    roots = np.roots(coeffs[::-1])
    return bool(np.all(np.abs(roots) > 1.0))


def _css_residuals(params, x, p, q):
    """Conditional residuals ``e_m .. e_{n-1}`` with ``m = max(p, q)``."""
    c = params[0]
    phi = params[1:1 + p]
    theta = params[1 + p:1 + p + q]
    m = max(p, q)
    n = x.shape[0]
    z = x[m:] - c
    for i in range(p):
        z = z - phi[i] * x[m - 1 - i:n - 1 - i]
    if q:
        return lfilter([1.0], np.r_[1.0, theta], z)
    return z


def _css(params, x, p, q, skip=0):
    e = _css_residuals(params, x, p, q)[skip:]
    with np.errstate(over="ignore", invalid="ignore"):
        return float(e @ e)


def _make_fit(order, params, x, series, n_iter=0, n_condition=None):
    p, q = order.p, order.q
    m = max(p, q)
    e = _css_residuals(params, x, p, q)
    # the likelihood conditions on the first n_condition differenced values
    n_cond = m if n_condition is None else n_condition
    e_used = e[n_cond - m:]
    n_eff = e_used.shape[0]
    sse = float(e_used @ e_used)
    sigma2 = sse / n_eff
    if not np.isfinite(sigma2):
        raise DegenerateInputError(f"{order}: residual variance is {sigma2}")
    # an exact fit (e.g. a constant series) would give an infinite likelihood
    sigma2 = max(sigma2, SIGMA2_FLOOR * (1.0 + float(np.mean(x * x))))
    loglik = -0.5 * n_eff * (np.log(2.0 * np.pi * sigma2) + 1.0)
    k = p + q + 2
    phi = np.array(params[1:1 + p], dtype=float)
    theta = np.array(params[1 + p:1 + p + q], dtype=float)
    residuals = np.concatenate([np.zeros(m), e])
    return ArimaFit(
        order=order,
        c=float(params[0]),
        phi=phi,
        theta=theta,
        sigma2=sigma2,
        loglik=float(loglik),
        aic=float(2 * k - 2 * loglik),
        residuals=residuals,
        n_conditioned=n_cond,
        series=series,
        stationary=_roots_outside_unit_circle(np.r_[1.0, -phi]),
        invertible=_roots_outside_unit_circle(np.r_[1.0, theta]),
        n_iter=n_iter,
    )


def fit_arima(series, order, max_iter=2000, rel_tol=1e-10, n_starts=3, n_condition=None):
    """Fit ARIMA(p, d, q) by conditional sum of squares.

    Parameters
    ----------
    series : TimeSeries or array-like
    order : ArimaOrder or tuple (p, d, q)
    max_iter : int
        Simplex iteration cap per start.
    rel_tol : float
        Relative SSE spread at which the simplex is considered converged.
    n_starts : int
        Number of simplex starts: the first at zero coefficients with the
        intercept at the differenced mean, the others jittered around it.
    n_condition : int, optional
        Number of leading differenced observations the likelihood conditions
        on, at least ``max(p, q)`` (the default). Residual recursions still
        start at ``max(p, q)``; the extra values only warm them up. Grid
        search sets it so every candidate is scored on the same days.

    Returns
    -------
    ArimaFit

    Raises
    ------
    InvalidArgumentError
        If the series is shorter than ``d + max(p, q) + 10``.
    ConvergenceError
        If the best start did not converge; ``best`` holds its fit.
    """
    if not isinstance(series, TimeSeries):
        series = TimeSeries(series)
    order = ArimaOrder.coerce(order)
    p, d, q = order
    need = d + max(p, q) + MIN_EXTRA_OBS
    if len(series) < need:
        raise InvalidArgumentError(f"{order} needs at least {need} observations, got {len(series)}")
    x = difference(series, d).values
    m = max(p, q)
    n_cond = m if n_condition is None else int(n_condition)
    if not m <= n_cond <= len(x) - MIN_EXTRA_OBS:
        raise InvalidArgumentError(f"n_condition must be in [{m}, {len(x) - MIN_EXTRA_OBS}], got {n_condition}")
    skip = n_cond - m

    if p == 0 and q == 0:
        return _make_fit(order, np.array([x[n_cond:].mean()]), x, series, n_condition=n_cond)

    # per-order seed keeps fits reproducible and independent of scheduling
    rng = np.random.default_rng([p, d, q])
    base = np.r_[x[n_cond:].mean(), np.zeros(p + q)]
    best = None
    for start in range(n_starts):
        x0 = base.copy()
        if start:
            x0[1:] += rng.normal(0.0, 0.1, size=p + q)
        res = nelder_mead(lambda v: _css(v, x, p, q, skip), x0, rel_tol=rel_tol, max_iter=max_iter)
        if best is None or res.fun < best.fun:
            best = res
    if not np.isfinite(best.fun):
        raise DegenerateInputError(f"{order}: conditional sum of squares diverged")
    fit = _make_fit(order, best.x, x, series, best.n_iter, n_cond)
    if not best.converged:
        raise ConvergenceError(f"{order}: simplex did not converge in {max_iter} iterations", best=fit)
    return fit


def _try_fit(series, order, **kwargs):
    try:
        return fit_arima(series, order, **kwargs)
    except (ConvergenceError, DegenerateInputError, InvalidArgumentError) as exc:
        return exc


def _rank_key(fit):
    o = fit.order
    return (fit.aic, o.p + o.d + o.q, (o.p, o.d, o.q))


def grid_search_arima(series, p_max=2, d_max=2, q_max=2, n_jobs=None, return_grid=False, **fit_kwargs):
    """Pick the ARIMA order with the lowest AIC over ``[0, p_max] x [0, d_max] x [0, q_max]``.

    Every candidate conditions on the same leading days of the original
    series (``d_max + max(p_max, q_max)`` of them), so all AICs are
    likelihoods of the same observations and directly comparable.

    Candidates whose fitted AR part is non-stationary or whose MA part is
    non-invertible are kept in the grid but only chosen when no regular fit
    exists. Ties in AIC go to the smaller ``p + d + q``, then to the
    lexicographically smaller order.

    Returns
    -------
    (ArimaOrder, ArimaFit), or (ArimaOrder, ArimaFit, dict) when
    ``return_grid`` is set; the dict maps every order to its fit or to the
    exception it raised.
    """
    if not isinstance(series, TimeSeries):
        series = TimeSeries(series)
    for name, value in (("p_max", p_max), ("d_max", d_max), ("q_max", q_max)):
        if not 0 <= value <= MAX_ORDER:
            raise InvalidArgumentError(f"{name} must be in [0, {MAX_ORDER}], got {value}")
    need = d_max + max(p_max, q_max) + MIN_EXTRA_OBS
    if len(series) < need:
        raise InvalidArgumentError(f"grid search needs at least {need} observations, got {len(series)}")

    orders = [
        ArimaOrder(p, d, q)
        for p in range(p_max + 1)
        for d in range(d_max + 1)
        for q in range(q_max + 1)
    ]
    lead = d_max + max(p_max, q_max)
    jobs = [(o, {**fit_kwargs, "n_condition": lead - o.d}) for o in orders]
    if n_jobs in (None, 1):
        results = [_try_fit(series, o, **kw) for o, kw in jobs]
    else:
        results = Parallel(n_jobs=n_jobs)(delayed(_try_fit)(series, o, **kw) for o, kw in jobs)
    grid = dict(zip(orders, results))

    fits = [r for r in results if isinstance(r, ArimaFit)]
    if not fits:
        failures = {str(o): repr(r) for o, r in grid.items()}
        raise GridSearchError("every ARIMA candidate failed to fit", failures)
    regular = [f for f in fits if not f.flagged]
    if not regular:
        logger.warning("all successful ARIMA fits are non-stationary or non-invertible")
    best = min(regular or fits, key=_rank_key)
    if return_grid:
        return best.order, best, grid
    return best.order, best


def _arma_forecast(fit, h):
    """Forecasts of the differenced series, future errors set to zero."""
    p, d, q = fit.order
    x = difference(fit.series, d).values
    e = fit.residuals
    hist_x = list(x[-p:]) if p else []
    hist_e = list(e[-q:]) if q else []
    out = np.empty(h)
    for j in range(h):
        value = fit.c
        for i in range(p):
            value += fit.phi[i] * hist_x[-1 - i]
        for k in range(q):
            value += fit.theta[k] * hist_e[-1 - k]
        out[j] = value
        if p:
            hist_x.append(value)
        if q:
            hist_e.append(0.0)
    return out


def _integrate(forecast_diffed, history, d):
    """Undo ``d`` differences using the tail of the original history."""
    levels = forecast_diffed
    for k in reversed(range(d)):
        last = np.diff(history, n=k)[-1]
        levels = last + np.cumsum(levels)
    return levels


def _psi_weights(fit, h):
    """MA(infinity) weights of the integrated model, psi_0 .. psi_{h-1}."""
    ar = np.r_[1.0, -fit.phi]
    for _ in range(fit.order.d):
        ar = np.convolve(ar, [1.0, -1.0])
    ma = np.r_[1.0, fit.theta]
    impulse = np.zeros(h)
    impulse[0] = 1.0
    return lfilter(ma, ar, impulse)


def forecast_arima(fit, h, level=0.95):
    """Point forecasts and normal intervals for the next ``h`` days."""
    h = check_positive_int(h, "h")
    history = fit.series.values
    mean = _integrate(_arma_forecast(fit, h), history, fit.order.d)
    psi = _psi_weights(fit, h)
    se = np.sqrt(fit.sigma2 * np.cumsum(psi ** 2))
    z = norm.ppf(0.5 + level / 2.0)
    return ForecastResult(
        mean=mean,
        start_day=fit.series.end_day + 1,
        series_id=fit.series.series_id,
        lower=mean - z * se,
        upper=mean + z * se,
    )


@dataclass
class DiagnosticsBundle:
    """Plottable residual diagnostics for a fitted ARIMA model."""

    standardized_residuals: np.ndarray
    residual_acf: np.ndarray
    qq_theoretical: np.ndarray
    qq_sample: np.ndarray
    histogram_counts: np.ndarray
    histogram_edges: np.ndarray
    order: tuple = field(default=())

    @property
    def qq_points(self):
        return np.column_stack([self.qq_theoretical, self.qq_sample])

    def to_dict(self):
        return {
            "order": list(self.order),
            "standardized_residuals": self.standardized_residuals.tolist(),
            "residual_acf": self.residual_acf.tolist(),
            "qq_points": self.qq_points.tolist(),
            "histogram": {
                "counts": self.histogram_counts.tolist(),
                "edges": self.histogram_edges.tolist(),
            },
        }

    def to_json(self):
        return json.dumps(self.to_dict())

    def to_csv(self):
        """Long CSV with columns ``panel,x,y`` (one panel per plot)."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["panel", "x", "y"])
        for i, v in enumerate(self.standardized_residuals):
            writer.writerow(["standardized_residual", i, repr(float(v))])
        for lag, v in enumerate(self.residual_acf):
            writer.writerow(["residual_acf", lag, repr(float(v))])
        for t, s in zip(self.qq_theoretical, self.qq_sample):
            writer.writerow(["qq", repr(float(t)), repr(float(s))])
        for lo, count in zip(self.histogram_edges[:-1], self.histogram_counts):
            writer.writerow(["histogram", repr(float(lo)), int(count)])
        return buf.getvalue()


def diagnostics(fit, max_lag=20, bins=20):
    """Standardized residuals, their ACF, normal QQ points and a histogram.

    Only residuals after the conditioning prefix are used. QQ theoretical
    quantiles use the ``(i - 0.5) / n`` plotting positions.
    """
    resid = fit.effective_residuals
    n = resid.shape[0]
    if n < 20:
        raise InvalidArgumentError(f"diagnostics need at least 20 residuals, got {n}")
    std = resid / np.sqrt(fit.sigma2)
    racf = acf(std, min(max_lag, n - 1))
    sample = np.sort(std)
    theoretical = norm.ppf((np.arange(1, n + 1) - 0.5) / n)
    counts, edges = np.histogram(std, bins=bins)
    return DiagnosticsBundle(std, racf, theoretical, sample, counts, edges, tuple(fit.order))


class ARIMA(BaseEstimator):
    """Estimator wrapper: ``ARIMA(order=(1, 1, 1)).fit(y).predict(28)``.

    Parameters
    ----------
    order : tuple of int
        ``(p, d, q)``.
    max_iter : int
        Simplex iteration cap. When it is reached the best iterate is kept
        and ``converged_`` is False.
    """

    def __init__(self, order=(1, 1, 1), max_iter=2000):
        self.order = order
        self.max_iter = max_iter

    def fit(self, y, start_day=1):
        series = y if isinstance(y, TimeSeries) else TimeSeries(y, start_day)
        try:
            self.fit_ = fit_arima(series, self.order, max_iter=self.max_iter)
            self.converged_ = True
        except ConvergenceError as exc:
            logger.warning("%s; using the best iterate", exc)
            self.fit_ = exc.best
            self.converged_ = False
        return self

    def forecast(self, horizon=28):
        check_is_fitted(self, "fit_")
        return forecast_arima(self.fit_, horizon)

    def predict(self, horizon=28):
        return self.forecast(horizon).mean

    @property
    def aic_(self):
        check_is_fitted(self, "fit_")
        return self.fit_.aic


class AutoARIMA(ARIMA):
    """ARIMA whose order is chosen by AIC grid search at fit time."""

    def __init__(self, max_p=2, max_d=2, max_q=2, max_iter=2000, n_jobs=None):
        self.max_p = max_p
        self.max_d = max_d
        self.max_q = max_q
        self.max_iter = max_iter
        self.n_jobs = n_jobs

    def fit(self, y, start_day=1):
        series = y if isinstance(y, TimeSeries) else TimeSeries(y, start_day)
        order, fit, grid = grid_search_arima(
            series,
            self.max_p,
            self.max_d,
            self.max_q,
            n_jobs=self.n_jobs,
            return_grid=True,
            max_iter=self.max_iter,
        )
        self.order_ = order
        self.fit_ = fit
        self.converged_ = True
        self.grid_ = grid
        return self
