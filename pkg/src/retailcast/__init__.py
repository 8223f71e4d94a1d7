"""Retail demand forecasting: ARIMA, additive trend/seasonality models and boosted trees."""

from .additive import AdditiveConfig, AdditiveForecaster, Holiday, Seasonality, fit_additive, forecast_additive
from .arima import ARIMA, ArimaOrder, AutoARIMA, diagnostics, fit_arima, forecast_arima, grid_search_arima
from .core import ForecastResult, SeasonalDecomposer, TimeSeries, acf, decompose, difference, rmse, undifference
from .exceptions import (
    ConvergenceError,
    DataIntegrityError,
    DegenerateInputError,
    DomainError,
    GridSearchError,
    InvalidArgumentError,
    NotFoundError,
    ParseError,
    RetailcastError,
)
from .gbdt import GBDTRegressor, GbdtParams

__version__ = "0.1.0"

__all__ = [
    "ARIMA",
    "AdditiveConfig",
    "AdditiveForecaster",
    "ArimaOrder",
    "AutoARIMA",
    "ConvergenceError",
    "DataIntegrityError",
    "DegenerateInputError",
    "DomainError",
    "ForecastResult",
    "GBDTRegressor",
    "GbdtParams",
    "GridSearchError",
    "Holiday",
    "InvalidArgumentError",
    "NotFoundError",
    "ParseError",
    "RetailcastError",
    "Seasonality",
    "SeasonalDecomposer",
    "TimeSeries",
    "acf",
    "decompose",
    "diagnostics",
    "difference",
    "fit_additive",
    "fit_arima",
    "forecast_additive",
    "forecast_arima",
    "grid_search_arima",
    "rmse",
    "undifference",
]
