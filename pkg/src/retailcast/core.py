"""Time-series primitives: differencing, autocorrelation, classical
decomposition and the RMSE metric used to score every forecaster."""

from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from ._validation import (
    as_float_vector,
    check_nonneg_int,
    check_positive_int,
    check_same_length,
)
from .exceptions import DegenerateInputError, DomainError, InvalidArgumentError

__all__ = [
    "TimeSeries",
    "Decomposition",
    "ForecastResult",
    "difference",
    "undifference",
    "acf",
    "decompose",
    "rmse",
    "SeasonalDecomposer",
]


@dataclass(frozen=True)
class TimeSeries:
    """Daily observations of one (item, store) pair.

    ``start_day`` counts days from the dataset origin, with day 1 being the
    first calendar date. Consecutive values are one day apart.
    """

    values: np.ndarray
    start_day: int = 1
    series_id: str = ""

    def __post_init__(self):
        values = as_float_vector(self.values, "values")
        object.__setattr__(self, "values", values)
        values.flags.writeable = False
        if isinstance(self.start_day, bool) or int(self.start_day) != self.start_day:
            raise InvalidArgumentError(f"start_day must be an integer, got {self.start_day!r}")
        if self.start_day < 1:
            raise InvalidArgumentError(f"start_day must be >= 1, got {self.start_day}")
        object.__setattr__(self, "start_day", int(self.start_day))

    def __len__(self):
        return self.values.shape[0]

    @property
    def end_day(self):
        """Day index of the last observation."""
        return self.start_day + len(self) - 1

    @property
    def days(self):
        return np.arange(self.start_day, self.end_day + 1)

    def head(self, n):
        """First ``n`` observations as a new series."""
        return TimeSeries(self.values[:n], self.start_day, self.series_id)

    def tail(self, n):
        return TimeSeries(self.values[len(self) - n:], self.end_day - n + 1, self.series_id)


def _as_series(series):
    if isinstance(series, TimeSeries):
        return series
    return TimeSeries(series)


@dataclass(frozen=True)
class Decomposition:
    level_trend: np.ndarray
    seasonal: np.ndarray
    residual: np.ndarray
    mode: str
    period: int

    def reconstruct(self):
        if self.mode == "additive":
            return self.level_trend + self.seasonal + self.residual
        return self.level_trend * self.seasonal * self.residual


@dataclass(frozen=True)
class ForecastResult:
    """Point forecasts for ``len(mean)`` consecutive days after the history.

    ``lower``/``upper`` hold interval bounds when the model provides them.
    """

    mean: np.ndarray
    start_day: int
    series_id: str = ""
    lower: np.ndarray = field(default=None)
    upper: np.ndarray = field(default=None)

    def __len__(self):
        return len(self.mean)

    @property
    def days(self):
        return np.arange(self.start_day, self.start_day + len(self.mean))

    def clamped(self):
        """Copy with every value floored at zero (unit sales cannot be negative)."""
        lo = None if self.lower is None else np.maximum(self.lower, 0.0)
        hi = None if self.upper is None else np.maximum(self.upper, 0.0)
        return ForecastResult(np.maximum(self.mean, 0.0), self.start_day, self.series_id, lo, hi)


def difference(series, d=1):
    """Apply the first-difference operator ``d`` times.

    Parameters
    ----------
    series : TimeSeries or array-like
    d : int
        Number of differences, ``0 <= d <= len(series) - 1``.

    Returns
    -------
    TimeSeries
        ``len(series) - d`` values; ``start_day`` shifted by ``d``.
    """
    series = _as_series(series)
    d = check_nonneg_int(d, "d")
    if d > len(series) - 1:
        raise InvalidArgumentError(
            f"cannot difference a series of length {len(series)} {d} times"
        )
    values = np.diff(series.values, n=d) if d else series.values.copy()
    return TimeSeries(values, series.start_day + d, series.series_id)


def undifference(diffed, prefix):
    """Invert :func:`difference` given the ``d`` values it dropped.

    ``prefix`` are the first ``d`` original observations. The result is
    the original series, rebuilt by repeated cumulative sums.
    """
    prefix = as_float_vector(prefix, "prefix", allow_empty=True)
    d = prefix.shape[0]
    values = as_float_vector(diffed, "diffed", allow_empty=True)
    # seeds for each integration level: the first value of the k-times differenced prefix
    seeds = [np.diff(prefix, n=k)[0] for k in range(d)]
    for k in reversed(range(d)):
        values = np.concatenate(([seeds[k]], seeds[k] + np.cumsum(values)))
    return values


def acf(series, max_lag):
    """Sample autocorrelation at lags ``0..max_lag``.

    Uses the biased estimator (divide by ``n`` at every lag), which keeps the
    autocorrelation sequence positive semi-definite.
    """
    x = _as_series(series).values
    n = x.shape[0]
    max_lag = check_positive_int(max_lag, "max_lag")
    if max_lag >= n:
        raise InvalidArgumentError(f"max_lag must be < series length ({n}), got {max_lag}")
    xc = x - x.mean()
    denom = float(xc @ xc)
    if denom == 0.0 or np.ptp(x) == 0.0:
        raise DegenerateInputError("autocorrelation of a constant series is undefined")
    out = np.empty(max_lag + 1)
    out[0] = 1.0
    for h in range(1, max_lag + 1):
        out[h] = float(xc[:-h] @ xc[h:]) / denom
    return out


def _centered_moving_average(x, period):
    """Centered MA of width ``period``; NaN where the window does not fit."""
    n = x.shape[0]
    if period % 2:
        weights = np.full(period, 1.0 / period)
    else:
        weights = np.r_[0.5, np.ones(period - 1), 0.5] / period
    half = len(weights) // 2
    trend = np.full(n, np.nan)
    trend[half:n - half] = np.convolve(x, weights, mode="valid")
    return trend, half


def _additive_parts(x, period):
    trend, half = _centered_moving_average(x, period)
    valid = ~np.isnan(trend)
    detrended = x - trend
    phase = np.arange(x.shape[0]) % period
    means = np.array([detrended[valid & (phase == k)].mean() for k in range(period)])
    means -= means.mean()
    # endpoint fill after the seasonal means so they only see real trend values
    trend[:half] = trend[half]
    trend[x.shape[0] - half:] = trend[x.shape[0] - half - 1]
    seasonal = means[phase]
    residual = x - trend - seasonal
    return trend, seasonal, residual


def decompose(series, period, mode="additive"):
    """Classical moving-average decomposition.

    Parameters
    ----------
    series : TimeSeries or array-like
        At least ``2 * period`` observations.
    period : int
        Seasonal period in days.
    mode : {"additive", "multiplicative"}
        Multiplicative mode requires strictly positive values. It is carried
        out in the log domain, so its trend is a geometric moving average and
        its seasonal factors have geometric mean one.

    Returns
    -------
    Decomposition
    """
    x = _as_series(series).values
    period = check_positive_int(period, "period")
    if mode not in ("additive", "multiplicative"):
        raise InvalidArgumentError(f"mode must be 'additive' or 'multiplicative', got {mode!r}")
    if x.shape[0] < 2 * period:
        raise InvalidArgumentError(
            f"series of length {x.shape[0]} is shorter than two periods ({2 * period})"
        )
    if mode == "additive":
        trend, seasonal, residual = _additive_parts(x, period)
    else:
        if np.any(x <= 0):
            raise DomainError("multiplicative decomposition needs strictly positive values")
        log_trend, log_seasonal, _ = _additive_parts(np.log(x), period)
        trend = np.exp(log_trend)
        seasonal = np.exp(log_seasonal)
        residual = x / (trend * seasonal)
    return Decomposition(trend, seasonal, residual, mode, period)


def rmse(actual, predicted):
    """Root mean squared error between two equal-length sequences."""
    a = as_float_vector(actual, "actual")
    p = as_float_vector(predicted, "predicted")
    check_same_length(a, p)
    return float(np.sqrt(np.mean((a - p) ** 2)))


class SeasonalDecomposer(TransformerMixin, BaseEstimator):
    """Transformer wrapper around :func:`decompose`.

    ``transform`` maps a 1-d series to an ``(n, 3)`` array whose columns are
    trend, seasonal and residual.
    """

    def __init__(self, period=7, mode="additive"):
        self.period = period
        self.mode = mode

    def fit(self, X, y=None):
        self.decomposition_ = decompose(np.ravel(X), self.period, self.mode)
        return self

    def transform(self, X):
        dec = decompose(np.ravel(X), self.period, self.mode)
        return np.column_stack([dec.level_trend, dec.seasonal, dec.residual])
