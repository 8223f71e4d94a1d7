"""Additive trend + seasonality + holiday forecaster.

    y(t) = g(t) + s(t) + h(t) + noise

``g`` is a piecewise linear or piecewise logistic trend whose growth rate
changes by ``delta_j`` at changepoint ``s_j``; ``s`` is a sum of Fourier
series; ``h`` adds one coefficient per holiday on the exact holiday dates.
Fitting is MAP: a Laplace prior on ``delta`` (L1 penalty, scale ``tau``)
and Gaussian priors on the seasonal and holiday coefficients (L2
penalties), with the noise scale profiled out at each outer iteration.
"""

import json
import logging
import warnings
from dataclasses import dataclass, field

import numpy as np
from numba import njit
from sklearn.base import BaseEstimator

from ._simplex import nelder_mead
from ._validation import (
    as_float_vector,
    check_is_fitted,
    check_positive_float,
    check_positive_int,
)
from .core import ForecastResult, TimeSeries
from .exceptions import ConvergenceError, DomainError, InvalidArgumentError

logger = logging.getLogger(__name__)

__all__ = [
    "Seasonality",
    "Holiday",
    "AdditiveConfig",
    "AdditiveFit",
    "default_seasonalities",
    "changepoint_indicator",
    "trend_linear",
    "logistic_gamma",
    "trend_logistic",
    "fourier_seasonality",
    "holiday_matrix",
    "fit_additive",
    "forecast_additive",
    "components",
    "AdditiveForecaster",
]

# floor on the profiled noise variance (in scaled units) so an exact fit
# does not send the penalty weights to zero
SIGMA2_FLOOR = 1e-12


@dataclass(frozen=True)
class Seasonality:
    name: str
    period: float
    order: int
    prior_sd: float = 10.0

    def __post_init__(self):
        check_positive_float(self.period, "period")
        check_positive_int(self.order, "order")
        check_positive_float(self.prior_sd, "prior_sd")


@dataclass(frozen=True)
class Holiday:
    name: str
    dates: frozenset
    prior_sd: float = 10.0

    def __post_init__(self):
        object.__setattr__(self, "dates", frozenset(int(d) for d in self.dates))
        check_positive_float(self.prior_sd, "prior_sd")


def default_seasonalities(prior_sd=10.0):
    """Weekly, monthly, quarterly and yearly Fourier terms (calendar-average periods)."""
    return (
        Seasonality("weekly", 7.0, 3, prior_sd),
        Seasonality("monthly", 30.4375, 5, prior_sd),
        Seasonality("quarterly", 91.3125, 5, prior_sd),
        Seasonality("yearly", 365.25, 10, prior_sd),
    )


@dataclass(frozen=True)
class AdditiveConfig:
    """Model structure and prior scales.

    ``changepoints=None`` places ``n_changepoints`` uniformly over the first
    ``changepoint_range`` fraction of the training window. ``capacity`` is
    only used by the logistic trend: a positive scalar, or an array of
    per-day values starting at the first training day (the last value is
    held beyond its end).
    """

    trend_type: str = "linear"
    capacity: object = None
    changepoints: tuple = None
    n_changepoints: int = 25
    changepoint_range: float = 0.8
    tau: float = 0.05
    seasonalities: tuple = field(default_factory=default_seasonalities)
    holidays: tuple = ()

    def __post_init__(self):
        if self.trend_type not in ("linear", "logistic"):
            raise InvalidArgumentError(f"trend_type must be 'linear' or 'logistic', got {self.trend_type!r}")
        check_positive_float(self.tau, "tau")
        if self.trend_type == "logistic" and self.capacity is None:
            raise InvalidArgumentError("logistic trend needs a capacity")
        if self.changepoints is not None:
            cps = tuple(float(s) for s in self.changepoints)
            if any(b <= a for a, b in zip(cps, cps[1:])):
                raise InvalidArgumentError("changepoints must be strictly ascending")
            object.__setattr__(self, "changepoints", cps)
        object.__setattr__(self, "seasonalities", tuple(self.seasonalities))
        object.__setattr__(self, "holidays", tuple(self.holidays))


@dataclass(frozen=True)
class AdditiveFit:
    """Fitted parameters in day units (``t`` is the absolute day index)."""

    k: float
    m: float
    delta: np.ndarray
    gamma: np.ndarray
    changepoints: np.ndarray
    fourier_coeffs: dict
    holiday_coeffs: np.ndarray
    config: AdditiveConfig
    sigma_e: float
    train_start: int
    train_end: int
    series_id: str = ""
    capacity_values: np.ndarray = None
    n_iter: int = 0

    def capacity_at(self, days):
        return _capacity_at(self.capacity_values, self.train_start, days)

    def to_dict(self):
        return {
            "k": self.k,
            "m": self.m,
            "delta": self.delta.tolist(),
            "gamma": self.gamma.tolist(),
            "changepoints": self.changepoints.tolist(),
            "fourier_coeffs": {
                name: {"a": a.tolist(), "b": b.tolist()}
                for name, (a, b) in self.fourier_coeffs.items()
            },
            "holiday_coeffs": {
                h.name: float(c) for h, c in zip(self.config.holidays, self.holiday_coeffs)
            },
            "sigma_e": self.sigma_e,
            "trend_type": self.config.trend_type,
            "train_start": self.train_start,
            "train_end": self.train_end,
        }


# ---------------------------------------------------------------------------
# model pieces


def changepoint_indicator(t, changepoints):
    """``a_j(t) = 1`` iff ``t >= s_j``; vector for scalar ``t``, matrix for arrays."""
    s = np.asarray(changepoints, dtype=float)
    t_arr = np.asarray(t, dtype=float)
    return (t_arr[..., None] >= s).astype(float)


def trend_linear(t, k, m, delta, changepoints):
    """Piecewise linear trend, continuous at every changepoint."""
    s = np.asarray(changepoints, dtype=float)
    delta = np.asarray(delta, dtype=float)
    a = changepoint_indicator(t, s)
    gamma = -s * delta
    return (k + a @ delta) * np.asarray(t, dtype=float) + (m + a @ gamma)


def logistic_gamma(k, m, delta, changepoints):
    """Offset adjustments that keep the piecewise logistic trend continuous.

    At changepoint ``j`` the rate moves from ``k + sum_{l<j} delta_l`` to
    ``k + sum_{l<=j} delta_l``; the offset moves by ``gamma_j`` so the
    exponent, and with it the curve, is unchanged at ``s_j``.
    """
    s = np.asarray(changepoints, dtype=float)
    delta = np.asarray(delta, dtype=float)
    gamma = np.zeros(s.shape[0])
    rate = k
    for j in range(s.shape[0]):
        new_rate = rate + delta[j]
        if new_rate == 0:
            raise DomainError(f"growth rate is exactly zero after changepoint {s[j]}")
        gamma[j] = (s[j] - m - gamma[:j].sum()) * (1.0 - rate / new_rate)
        rate = new_rate
    return gamma


def trend_logistic(t, k, m, delta, changepoints, capacity):
    """Piecewise logistic trend saturating at ``capacity`` (scalar or per-``t``)."""
    cap = np.asarray(capacity, dtype=float)
    if np.any(cap <= 0):
        raise DomainError("logistic capacity must be strictly positive")
    s = np.asarray(changepoints, dtype=float)
    delta = np.asarray(delta, dtype=float)
    a = changepoint_indicator(t, s)
    gamma = logistic_gamma(k, m, delta, s)
    rate = k + a @ delta
    offset = m + a @ gamma
    with np.errstate(over="ignore"):
        return cap / (1.0 + np.exp(-rate * (np.asarray(t, dtype=float) - offset)))


def fourier_seasonality(t, period, a, b):
    """``sum_n a_n cos(2 pi n t / P) + b_n sin(2 pi n t / P)``; zero for no terms."""
    period = check_positive_float(period, "period")
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    t = np.asarray(t, dtype=float)
    if a.shape[0] == 0:
        return np.zeros_like(t)
    cos, sin = _fourier_columns(t, period, a.shape[0])
    return cos @ a + sin @ b


def _fourier_columns(t, period, order):
    # reduce t modulo the period first so S(t) and S(t + P) see the same angle
    phase = np.mod(np.asarray(t, dtype=float), period) / period
    n = np.arange(1, order + 1)
    angle = 2.0 * np.pi * phase[..., None] * n
    return np.cos(angle), np.sin(angle)


def holiday_matrix(days, holidays):
    """Indicator matrix ``Z[i, l] = 1`` iff ``days[i]`` is a date of holiday ``l``."""
    days = np.asarray(days, dtype=np.int64)
    z = np.zeros((days.shape[0], len(holidays)))
    for col, hol in enumerate(holidays):
        dates = hol.dates if isinstance(hol, Holiday) else frozenset(int(d) for d in hol)
        if dates:
            z[:, col] = np.isin(days, np.fromiter(dates, dtype=np.int64))
    return z


def _capacity_at(values, start, days):
    days = np.asarray(days, dtype=np.int64)
    if values.shape[0] == 1:
        return np.full(days.shape[0], values[0])
    idx = np.clip(days - start, 0, values.shape[0] - 1)
    return values[idx]


# ---------------------------------------------------------------------------
# fitting


@njit(cache=True)
def _cd_sweep(X, resid, beta, l1, ridge, sigma2, col_sq):
    """One coordinate-descent pass; ``resid = y - X beta`` is kept in sync."""
    n, p = X.shape
    for j in range(p):
        if col_sq[j] == 0.0:
            continue
        old = beta[j]
        rho = old * col_sq[j]
        for i in range(n):
            rho += X[i, j] * resid[i]
        thr = l1[j] * sigma2
        if rho > thr:
            num = rho - thr
        elif rho < -thr:
            num = rho + thr
        else:
            num = 0.0
        new = num / (col_sq[j] + sigma2 * ridge[j])
        if new != old:
            diff = new - old
            for i in range(n):
                resid[i] -= diff * X[i, j]
            beta[j] = new


def _penalty(beta, l1, ridge):
    return float(np.sum(l1 * np.abs(beta)) + 0.5 * np.sum(ridge * beta ** 2))


def _seasonal_design(days, seasonalities):
    blocks = []
    for seas in seasonalities:
        cos, sin = _fourier_columns(days, seas.period, seas.order)
        blocks.append(np.column_stack([cos, sin]))
    if not blocks:
        return np.zeros((np.asarray(days).shape[0], 0))
    return np.column_stack(blocks)


def _auto_changepoints(start, end, n_changepoints, changepoint_range):
    if n_changepoints <= 0:
        return np.zeros(0)
    hist_end = start + (end - start) * changepoint_range
    # n points strictly inside (start, hist_end]
    return np.linspace(start, hist_end, n_changepoints + 1)[1:]


def _split_coeffs(coefs, seasonalities, y_scale):
    out = {}
    pos = 0
    for seas in seasonalities:
        a = coefs[pos:pos + seas.order] * y_scale
        b = coefs[pos + seas.order:pos + 2 * seas.order] * y_scale
        out[seas.name] = (a, b)
        pos += 2 * seas.order
    return out


def fit_additive(series, config=None, max_sweeps=5000, rel_tol=1e-8):
    """MAP fit of the additive model.

    Parameters
    ----------
    series : TimeSeries
        Training history; day indices come from ``series.start_day``.
    config : AdditiveConfig, optional
    max_sweeps : int
        Cap on outer iterations (coordinate sweeps for the linear trend).
    rel_tol : float
        Relative change of the profiled objective that ends iteration.

    Returns
    -------
    AdditiveFit

    Raises
    ------
    InvalidArgumentError
        If the series is shorter than twice the longest seasonal period or
        a changepoint lies outside the training window.
    ConvergenceError
        If ``max_sweeps`` is reached; ``best`` holds the last iterate.
    """
    if not isinstance(series, TimeSeries):
        series = TimeSeries(series)
    config = config or AdditiveConfig()
    y = series.values
    n = y.shape[0]
    days = series.days.astype(float)
    start, end = series.start_day, series.end_day
    if config.seasonalities:
        longest = max(s.period for s in config.seasonalities)
        if n < 2 * longest:
            raise InvalidArgumentError(
                f"series of length {n} is shorter than twice the longest seasonal period ({longest})"
            )
    if n < 2:
        raise InvalidArgumentError("need at least two observations")

    if config.changepoints is None:
        cps = _auto_changepoints(start, end, config.n_changepoints, config.changepoint_range)
    else:
        cps = np.asarray(config.changepoints, dtype=float)
        if cps.size and (cps[0] <= start or cps[-1] >= end):
            raise InvalidArgumentError(
                f"changepoints must lie strictly inside the training window ({start}, {end})"
            )

    capacity_values = None
    if config.trend_type == "logistic":
        capacity_values = as_float_vector(np.atleast_1d(config.capacity), "capacity")
        if np.any(capacity_values <= 0):
            raise DomainError("logistic capacity must be strictly positive")

    seas_X = _seasonal_design(days, config.seasonalities)
    hol_X = holiday_matrix(series.days, config.holidays)
    seas_ridge = np.concatenate(
        [np.full(2 * s.order, 1.0 / s.prior_sd ** 2) for s in config.seasonalities]
    ) if config.seasonalities else np.zeros(0)
    hol_ridge = np.array([1.0 / h.prior_sd ** 2 for h in config.holidays])

    common = dict(
        series=series, config=config, cps=cps, seas_X=seas_X, hol_X=hol_X,
        seas_ridge=seas_ridge, hol_ridge=hol_ridge, capacity_values=capacity_values,
        max_sweeps=max_sweeps, rel_tol=rel_tol,
    )
    if np.ptp(y) == 0:
        warnings.warn("constant training series; returning a flat fit", RuntimeWarning, stacklevel=2)
        return _flat_fit(**common)
    if config.trend_type == "linear":
        return _fit_linear(**common)
    return _fit_logistic(**common)


def _flat_fit(series, config, cps, capacity_values, **_):
    level = float(series.values[0])
    k, m = 0.0, level
    if config.trend_type == "logistic":
        # a flat logistic curve sits at the capacity; the offset is irrelevant
        k, m = 0.0, float(series.start_day)
    zeros = np.zeros(cps.shape[0])
    return AdditiveFit(
        k=k, m=m, delta=zeros, gamma=zeros.copy(), changepoints=cps,
        fourier_coeffs={s.name: (np.zeros(s.order), np.zeros(s.order)) for s in config.seasonalities},
        holiday_coeffs=np.zeros(len(config.holidays)), config=config, sigma_e=0.0,
        train_start=series.start_day, train_end=series.end_day, series_id=series.series_id,
        capacity_values=capacity_values,
    )


def _scales(series):
    start, end = series.start_day, series.end_day
    t_span = float(max(end - start, 1))
    y_scale = float(np.max(np.abs(series.values))) or 1.0
    return float(start), t_span, y_scale


def _feature_sign(M, c, lam, beta, max_steps=2000, rtol=1e-10):
    """Exact minimizer of ``0.5 b'Mb - c'b + sum(lam * |b|)`` by feature-sign search.

    ``M`` must be positive definite. Coefficients with ``lam == 0`` are
    unpenalized and always active. Each step solves the stationarity system
    on the active set for the current sign pattern, then line-searches over
    the zero crossings on the way, so the objective never increases and the
    sign pattern cannot cycle.
    """
    free = lam == 0
    beta = beta.copy()
    active = free | (beta != 0)
    theta = np.where(free, 0.0, np.sign(beta))
    tol = rtol * max(1.0, float(np.max(np.abs(c))))

    def obj(b):
        return 0.5 * b @ M @ b - c @ b + np.sum(lam * np.abs(b))

    for _ in range(max_steps):
        grad = M @ beta - c
        on = active & ~free
        stationary = (np.all(np.abs(grad[on] + lam[on] * theta[on]) <= tol)
                      and np.all(np.abs(grad[free]) <= tol))
        if stationary:
            viol = np.where(active, -np.inf, np.abs(grad) - lam)
            j = int(np.argmax(viol)) if viol.size else 0
            if viol.size == 0 or viol[j] <= tol:
                return beta
            theta[j] = -np.sign(grad[j])
            active[j] = True

        idx = np.flatnonzero(active)
        cur = beta[idx]
        target = np.linalg.solve(M[np.ix_(idx, idx)], c[idx] - lam[idx] * theta[idx])
        direction = target - cur
        pen = ~free[idx]
        flips = pen & (cur != 0) & (np.sign(target) != np.sign(cur))
        steps = np.r_[1.0, cur[flips] / (cur[flips] - target[flips])]
        best, best_val = None, np.inf
        for s in steps:
            cand = beta.copy()
            cand[idx] = cur + s * direction
            if s < 1.0:
                # the coordinate that crosses at this step lands exactly on zero
                hit = flips & np.isclose(cur / np.where(cur - target == 0, 1, cur - target), s)
                cand[idx[hit]] = 0.0
            val = obj(cand)
            if val < best_val:
                best, best_val = cand, val
        beta = best
        active = free | (beta != 0)
        theta = np.where(free, 0.0, np.sign(beta))
    raise ConvergenceError("feature-sign search did not terminate", best=beta)


def _fit_linear(series, config, cps, seas_X, hol_X, seas_ridge, hol_ridge,
                capacity_values, max_sweeps, rel_tol, warm_sweeps=50):
    t0, t_span, y_scale = _scales(series)
    y = series.values / y_scale
    n = y.shape[0]
    ts = (series.days - t0) / t_span
    cps_s = (cps - t0) / t_span
    hinge = np.maximum(ts[:, None] - cps_s[None, :], 0.0)
    X = np.column_stack([np.ones(n), ts, hinge, seas_X, hol_X])
    n_cp = cps.shape[0]
    n_seas = seas_X.shape[1]
    l1 = np.concatenate([[0.0, 0.0], np.full(n_cp, 1.0 / config.tau), np.zeros(n_seas + hol_X.shape[1])])
    ridge = np.concatenate([[0.0, 0.0], np.zeros(n_cp), seas_ridge, hol_ridge])

    beta = np.zeros(X.shape[1])
    beta[:2] = np.linalg.lstsq(X[:, :2], y, rcond=None)[0]
    resid = y - X @ beta
    col_sq = np.einsum("ij,ij->j", X, X)
    gram = X.T @ X
    xty = X.T @ y
    # a tiny jitter keeps the Gram matrix invertible when columns coincide
    jitter = 1e-12 * np.trace(gram) / gram.shape[0]

    def objective(sigma2):
        return 0.5 * float(resid @ resid) / sigma2 + _penalty(beta, l1, ridge)

    sigma2 = max(float(resid @ resid) / n, SIGMA2_FLOOR)
    prev = objective(sigma2)
    converged = False
    it = 0
    for it in range(1, max_sweeps + 1):
        # soft-thresholded coordinate sweeps warm-start the exact active-set solve
        for _ in range(warm_sweeps if it == 1 else 1):
            _cd_sweep(X, resid, beta, l1, ridge, sigma2, col_sq)
        M = gram + np.diag(sigma2 * ridge + jitter)
        beta = _feature_sign(M, xty, sigma2 * l1, beta)
        resid = y - X @ beta
        sigma2 = max(float(resid @ resid) / n, SIGMA2_FLOOR)
        cur = objective(sigma2)
        if abs(prev - cur) <= rel_tol * max(abs(cur), 1e-300):
            converged = True
            break
        prev = cur

    k_s, m_s = beta[1], beta[0]
    delta_s = beta[2:2 + n_cp]
    fit = AdditiveFit(
        k=k_s * y_scale / t_span,
        m=y_scale * (m_s - k_s * t0 / t_span),
        delta=delta_s * y_scale / t_span,
        gamma=-cps * (delta_s * y_scale / t_span),
        changepoints=cps,
        fourier_coeffs=_split_coeffs(beta[2 + n_cp:2 + n_cp + n_seas], config.seasonalities, y_scale),
        holiday_coeffs=beta[2 + n_cp + n_seas:] * y_scale,
        config=config,
        sigma_e=float(np.sqrt(float(resid @ resid) / n)) * y_scale,
        train_start=series.start_day,
        train_end=series.end_day,
        series_id=series.series_id,
        n_iter=it,
    )
    if not converged:
        raise ConvergenceError(f"penalized fit did not converge in {max_sweeps} iterations", best=fit)
    return fit


def _logistic_curve(ts, k, m, delta, cps_s, cap_s):
    a = (ts[:, None] >= cps_s[None, :]).astype(float)
    gamma = logistic_gamma(k, m, delta, cps_s)
    rate = k + a @ delta
    offset = m + a @ gamma
    with np.errstate(over="ignore"):
        return cap_s / (1.0 + np.exp(-rate * (ts - offset)))


def _logistic_init(y, cap):
    w = max(1, min(7, y.shape[0] // 4))
    lo = np.clip(y[:w].mean() / cap[:w].mean(), 0.01, 0.99)
    hi = np.clip(y[-w:].mean() / cap[-w:].mean(), 0.01, 0.99)
    r0, r1 = np.log(lo / (1 - lo)), np.log(hi / (1 - hi))
    k = r1 - r0
    if abs(k) < 0.01:
        k = 0.01 if k >= 0 else -0.01
    return k, -r0 / k


def _fit_logistic(series, config, cps, seas_X, hol_X, seas_ridge, hol_ridge,
                  capacity_values, max_sweeps, rel_tol):
    t0, t_span, y_scale = _scales(series)
    y = series.values / y_scale
    n = y.shape[0]
    ts = (series.days - t0) / t_span
    cps_s = (cps - t0) / t_span
    cap_s = _capacity_at(capacity_values, series.start_day, series.days) / y_scale
    lin_X = np.column_stack([seas_X, hol_X])
    ridge = np.concatenate([seas_ridge, hol_ridge])
    n_cp = cps.shape[0]

    k, m = _logistic_init(y, cap_s)
    theta = np.r_[k, m, np.zeros(n_cp)]
    beta = np.zeros(lin_X.shape[1])

    def trend(th):
        try:
            return _logistic_curve(ts, th[0], th[1], th[2:], cps_s, cap_s)
        except DomainError:
            return np.full(n, np.inf)

    def sse(th, b):
        r = y - trend(th) - lin_X @ b
        return float(r @ r)

    def objective(th, b, sigma2):
        return (0.5 * sse(th, b) / sigma2 + np.sum(np.abs(th[2:])) / config.tau
                + 0.5 * float(np.sum(ridge * b ** 2)))

    sigma2 = max(sse(theta, beta) / n, SIGMA2_FLOOR)
    prev = objective(theta, beta, sigma2)
    converged = False
    outer = 0
    max_outer = max(1, min(max_sweeps, 200))
    for outer in range(1, max_outer + 1):
        seasonal_part = lin_X @ beta
        res = nelder_mead(
            lambda th: 0.5 * float(np.sum((y - trend(th) - seasonal_part) ** 2)) / sigma2
            + np.sum(np.abs(th[2:])) / config.tau,
            theta,
            rel_tol=1e-12,
            max_iter=2000 * (1 + n_cp // 5),
        )
        theta = res.x
        if lin_X.shape[1]:
            target = y - trend(theta)
            A = lin_X.T @ lin_X + sigma2 * np.diag(ridge)
            beta = np.linalg.solve(A, lin_X.T @ target)
        sigma2 = max(sse(theta, beta) / n, SIGMA2_FLOOR)
        cur = objective(theta, beta, sigma2)
        if abs(prev - cur) <= rel_tol * max(abs(cur), 1e-300):
            converged = True
            break
        prev = cur

    k_s, m_s, delta_s = theta[0], theta[1], theta[2:]
    n_seas = seas_X.shape[1]
    fit = AdditiveFit(
        k=k_s / t_span,
        m=t0 + m_s * t_span,
        delta=delta_s / t_span,
        gamma=logistic_gamma(k_s / t_span, t0 + m_s * t_span, delta_s / t_span, cps),
        changepoints=cps,
        fourier_coeffs=_split_coeffs(beta[:n_seas], config.seasonalities, y_scale),
        holiday_coeffs=beta[n_seas:] * y_scale,
        config=config,
        sigma_e=float(np.sqrt(sse(theta, beta) / n)) * y_scale,
        train_start=series.start_day,
        train_end=series.end_day,
        series_id=series.series_id,
        capacity_values=capacity_values,
        n_iter=outer,
    )
    if not converged:
        raise ConvergenceError(f"alternating logistic fit did not converge in {max_outer} rounds", best=fit)
    return fit


# ---------------------------------------------------------------------------
# prediction


def components(fit, days):
    """Per-component contributions on ``days``.

    Returns a dict with ``"trend"``, one entry per seasonality name and
    ``"holidays"``. Their sum is exactly the raw (unclamped) prediction
    returned by :func:`predict_raw`.
    """
    days = np.asarray(days, dtype=np.int64)
    t = days.astype(float)
    out = {}
    if fit.config.trend_type == "linear":
        out["trend"] = np.asarray(trend_linear(t, fit.k, fit.m, fit.delta, fit.changepoints), dtype=float)
    else:
        out["trend"] = np.asarray(
            trend_logistic(t, fit.k, fit.m, fit.delta, fit.changepoints, fit.capacity_at(days)),
            dtype=float,
        )
    for seas in fit.config.seasonalities:
        a, b = fit.fourier_coeffs[seas.name]
        out[seas.name] = fourier_seasonality(t, seas.period, a, b)
    z = holiday_matrix(days, fit.config.holidays)
    out["holidays"] = z @ fit.holiday_coeffs if z.shape[1] else np.zeros(days.shape[0])
    return out


def predict_raw(fit, days):
    total = None
    for values in components(fit, days).values():
        total = values.copy() if total is None else total + values
    return total


def forecast_additive(fit, h, clamp=True):
    """Forecast the ``h`` days after the training window.

    Negative raw values are reported as zero when ``clamp`` is set.
    """
    h = check_positive_int(h, "h")
    days = np.arange(fit.train_end + 1, fit.train_end + 1 + h)
    raw = predict_raw(fit, days)
    mean = np.maximum(raw, 0.0) if clamp else raw
    return ForecastResult(mean=mean, start_day=int(days[0]), series_id=fit.series_id)


def components_to_json(fit, days):
    comps = components(fit, days)
    payload = {"day": np.asarray(days).tolist()}
    payload.update({name: values.tolist() for name, values in comps.items()})
    return json.dumps(payload)


class AdditiveForecaster(BaseEstimator):
    """Estimator wrapper around :func:`fit_additive`.

    Seasonalities longer than half the training history are dropped at fit
    time when ``seasonalities="auto"``.
    """

    def __init__(self, trend_type="linear", capacity=None, changepoints=None,
                 n_changepoints=25, tau=0.05, seasonalities="auto", holidays=(),
                 seasonality_prior_sd=10.0, clamp=True):
        self.trend_type = trend_type
        self.capacity = capacity
        self.changepoints = changepoints
        self.n_changepoints = n_changepoints
        self.tau = tau
        self.seasonalities = seasonalities
        self.holidays = holidays
        self.seasonality_prior_sd = seasonality_prior_sd
        self.clamp = clamp

    def _config(self, n):
        if isinstance(self.seasonalities, str) and self.seasonalities == "auto":
            seas = tuple(s for s in default_seasonalities(self.seasonality_prior_sd) if 2 * s.period <= n)
        else:
            seas = tuple(self.seasonalities)
        return AdditiveConfig(
            trend_type=self.trend_type,
            capacity=self.capacity,
            changepoints=self.changepoints,
            n_changepoints=self.n_changepoints,
            tau=self.tau,
            seasonalities=seas,
            holidays=tuple(self.holidays),
        )

    def fit(self, y, start_day=1):
        series = y if isinstance(y, TimeSeries) else TimeSeries(y, start_day)
        try:
            self.fit_ = fit_additive(series, self._config(len(series)))
        except ConvergenceError as exc:
            logger.warning("%s; using the last iterate", exc)
            self.fit_ = exc.best
        return self

    def forecast(self, horizon=28):
        check_is_fitted(self, "fit_")
        return forecast_additive(self.fit_, horizon, clamp=self.clamp)

    def predict(self, horizon=28):
        return self.forecast(horizon).mean

    def components(self, days):
        check_is_fitted(self, "fit_")
        return components(self.fit_, days)
