"""Benchmark orchestration: EDA statistics, single-product runs, the category benchmark and the CLI."""

from .config import BenchmarkConfig, load_config
from .eda import EventPriceStats, eda_event_price_stats, eda_sales_summaries
from .runner import (
    BenchmarkResult,
    RetailData,
    SingleResult,
    export_forecasts,
    gbdt_forecasts,
    read_forecasts,
    rmse_table,
    run_benchmark,
    run_single_product,
)

__all__ = [
    "BenchmarkConfig",
    "BenchmarkResult",
    "EventPriceStats",
    "RetailData",
    "SingleResult",
    "eda_event_price_stats",
    "eda_sales_summaries",
    "export_forecasts",
    "gbdt_forecasts",
    "load_config",
    "read_forecasts",
    "rmse_table",
    "run_benchmark",
    "run_single_product",
]
