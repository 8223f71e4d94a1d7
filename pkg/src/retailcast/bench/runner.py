"""Single-product runs, the per-category benchmark and forecast export."""

import json
import logging
import os
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from joblib import Parallel, delayed

from .._validation import check_positive_int
from ..additive import AdditiveForecaster, Holiday, components_to_json
from ..arima import ARIMA, AutoARIMA, diagnostics
from ..core import ForecastResult, TimeSeries, rmse
from ..exceptions import InvalidArgumentError, NotFoundError, RetailcastError
from ..features import CATEGORICAL_FEATURES, MODEL_FEATURES, build_feature_matrix, lag_block
from ..gbdt import GbdtParams, feature_importance, train
from ..ingest import day_columns, find_m5_files, melt_wide_to_long, parse_calendar, parse_prices, parse_sales_wide
from .config import MODELS

logger = logging.getLogger(__name__)

# shortest training history a single-product run accepts
MIN_FIT_LENGTH = 30


@dataclass
class RetailData:
    """Wide sales, calendar and (optional) prices held in memory."""

    sales: pd.DataFrame
    calendar: pd.DataFrame
    prices: pd.DataFrame = None

    @classmethod
    def load(cls, calendar_path, sales_path, prices_path=None):
        prices = parse_prices(prices_path) if prices_path else None
        return cls(parse_sales_wide(sales_path), parse_calendar(calendar_path), prices)

    @classmethod
    def from_dir(cls, data_dir):
        paths = find_m5_files(data_dir)
        return cls.load(paths["calendar"], paths["sales"], paths["prices"])

    @property
    def n_days(self):
        return len(day_columns(self.sales))

    def resolve_id(self, product_id):
        """Match an id exactly, with dots for underscores, or without the file suffix."""
        ids = self.sales["id"]
        want = str(product_id).replace(".", "_")
        exact = np.flatnonzero((ids == want).to_numpy())
        if exact.size:
            return ids.iloc[exact[0]]
        pref = np.flatnonzero(ids.str.startswith(want + "_").to_numpy())
        if pref.size:
            return ids.iloc[pref[0]]
        raise NotFoundError(f"unknown product id {product_id!r}")

    def series(self, product_id):
        sid = self.resolve_id(product_id)
        row = self.sales.loc[self.sales["id"] == sid, day_columns(self.sales)]
        return TimeSeries(row.to_numpy(np.float64)[0], 1, sid)

    def select_products(self, categories, n_per_category):
        """First ``n_per_category`` ids of each category in file order."""
        chosen = []
        for cat in categories:
            ids = self.sales.loc[self.sales["cat_id"] == cat, "id"].tolist()
            if not ids:
                raise InvalidArgumentError(f"category {cat!r} does not occur in the sales data")
            chosen.extend(ids[:n_per_category])
        return chosen

    def event_holidays(self):
        ev = self.calendar[self.calendar["event_name_1"].notna()]
        return tuple(
            Holiday(str(name), frozenset(days.tolist()))
            for name, days in ev.groupby("event_name_1", sort=False)["day"]
        )

    def long_for(self, ids):
        subset = self.sales[self.sales["id"].isin(ids)]
        order = {sid: i for i, sid in enumerate(ids)}
        subset = subset.iloc[np.argsort(subset["id"].map(order).to_numpy(), kind="stable")]
        return melt_wide_to_long(subset.reset_index(drop=True))


@dataclass
class SingleResult:
    product_id: str
    model: str
    forecast: ForecastResult
    actual: np.ndarray
    rmse: float
    payload: dict = field(default_factory=dict)


def _check_length(series, horizon):
    if len(series) <= horizon + MIN_FIT_LENGTH:
        raise InvalidArgumentError(
            f"series {series.series_id} has {len(series)} days; need more than horizon + {MIN_FIT_LENGTH}"
        )


def _split(series, horizon):
    train_part = series.head(len(series) - horizon)
    return train_part, np.asarray(series.values[len(series) - horizon:])


def _fit_arima(train_part, horizon, order=None, max_order=(2, 2, 2)):
    if order is not None:
        est = ARIMA(order=tuple(order)).fit(train_part)
    else:
        est = AutoARIMA(*max_order).fit(train_part)
    return est, est.forecast(horizon)


def _fit_additive(train_part, horizon, holidays=()):
    est = AdditiveForecaster(holidays=holidays, clamp=False).fit(train_part)
    return est, est.forecast(horizon)


def gbdt_forecasts(data, ids, horizon, params=None):
    """Train one pooled model on all but the last ``horizon`` days and forecast recursively.

    The held-out targets are masked before any feature is built, and
    test-day lag and rolling-mean features are filled from the model's own
    predictions, so nothing from the tail reaches the model.

    Returns
    -------
    forecasts : dict
        series id -> ndarray of length ``horizon``.
    model : GbdtModel
    """
    params = params or GbdtParams()
    long = data.long_for(ids)
    n_days = data.n_days
    train_end = n_days - horizon
    masked = long.assign(unit_sales=np.where(long["day"] > train_end, np.nan, long["unit_sales"].astype(np.float64)))
    fm = build_feature_matrix(masked, data.calendar, data.prices)
    is_train = (fm["day"] <= train_end).to_numpy()
    model = train(
        fm.loc[is_train, MODEL_FEATURES],
        fm.loc[is_train, "target"].to_numpy(),
        params,
        categorical_features=CATEGORICAL_FEATURES,
    )
    n_series = len(ids)
    Y = fm["target"].to_numpy(np.float64).reshape(n_series, n_days)
    # fm holds n_days consecutive rows per series, series in `ids` order
    for t in range(train_end, n_days):
        rows = fm.iloc[np.arange(n_series) * n_days + t][MODEL_FEATURES].copy()
        for col, vals in lag_block(Y, t).items():
            rows[col] = vals
        Y[:, t] = model.predict(rows)
    series_ids = fm["series_id"].to_numpy().reshape(n_series, n_days)[:, 0]
    return {sid: Y[i, train_end:].copy() for i, sid in enumerate(series_ids)}, model


def run_single_product(data, model, product_id, horizon=28, clamp=True, arima_order=None, gbdt_params=None, holidays=None):
    """Fit one model on a product's history minus the final ``horizon`` days and score the tail.

    Raises
    ------
    NotFoundError
        The product id does not occur in the data.
    """
    if model not in MODELS:
        raise InvalidArgumentError(f"model must be one of {MODELS}, got {model!r}")
    horizon = check_positive_int(horizon, "horizon")
    series = data.series(product_id)
    _check_length(series, horizon)
    train_part, actual = _split(series, horizon)
    payload = {}
    if model == "arima":
        est, fc = _fit_arima(train_part, horizon, arima_order)
        payload["order"] = list(est.fit_.order)
        payload["aic"] = est.fit_.aic
        payload["converged"] = est.converged_
        try:
            payload["diagnostics"] = diagnostics(est.fit_).to_dict()
        except RetailcastError as exc:
            payload["diagnostics_error"] = str(exc)
    elif model == "additive":
        hol = data.event_holidays() if holidays is None else holidays
        est, fc = _fit_additive(train_part, horizon, hol)
        days = np.arange(1, series.end_day + 1)
        payload["components"] = json.loads(components_to_json(est.fit_, days))
    else:
        out, gbm = gbdt_forecasts(data, [series.series_id], horizon, gbdt_params)
        fc = ForecastResult(out[series.series_id], train_part.end_day + 1, series.series_id)
        payload["feature_importance"] = feature_importance(gbm)
    fc = ForecastResult(fc.mean, fc.start_day, series.series_id, fc.lower, fc.upper)
    if clamp:
        fc = fc.clamped()
    return SingleResult(series.series_id, model, fc, actual, rmse(actual, fc.mean), payload)


def _per_product(data_series, model, horizon, clamp, max_order, holidays):
    sid = data_series.series_id
    try:
        _check_length(data_series, horizon)
        train_part, actual = _split(data_series, horizon)
        if model == "arima":
            _, fc = _fit_arima(train_part, horizon, max_order=max_order)
        else:
            _, fc = _fit_additive(train_part, horizon, holidays)
        mean = np.maximum(fc.mean, 0.0) if clamp else fc.mean
        return sid, mean, rmse(actual, mean), ""
    except (RetailcastError, ValueError, np.linalg.LinAlgError) as exc:
        return sid, None, float("nan"), f"{type(exc).__name__}: {exc}"


@dataclass
class BenchmarkResult:
    rmse_table: pd.DataFrame
    detail: pd.DataFrame
    forecasts: dict


def rmse_table(detail, categories, models):
    """Per-(model, category) mean RMSE plus Total = mean over every scored product."""
    ok = detail[detail["error"] == ""]
    rows = []
    for m in models:
        sub = ok[ok["model"] == m]
        row = {"model": m}
        for c in categories:
            vals = sub.loc[sub["cat_id"] == c, "rmse"]
            row[c] = float(vals.mean()) if len(vals) else float("nan")
        row["Total"] = float(sub["rmse"].mean()) if len(sub) else float("nan")
        row["n_products"] = int(len(sub))
        row["n_failed"] = int(((detail["model"] == m) & (detail["error"] != "")).sum())
        rows.append(row)
    return pd.DataFrame(rows, columns=["model", *categories, "Total", "n_products", "n_failed"])


def run_benchmark(config, data=None):
    """Run the per-category comparison described by ``config`` and write its outputs.

    Writes ``rmse_table.csv``, ``detail.csv`` (one row per product and
    model, failures included with their error) and ``forecasts.json`` to
    ``config.output_dir``.
    """
    if data is None:
        data = RetailData.load(config.calendar_path, config.sales_path, config.prices_path)
    ids = data.select_products(config.categories, config.n_per_category)
    cat_of = dict(zip(data.sales["id"], data.sales["cat_id"]))
    series = [data.series(sid) for sid in ids]
    h = config.horizon
    holidays = data.event_holidays() if config.use_event_holidays else ()
    records, forecasts = [], {}

    for model in config.models:
        if model == "gbdt":
            params = GbdtParams(**{"seed": config.seed, **config.gbdt_params})
            try:
                out, _ = gbdt_forecasts(data, ids, h, params)
                err = ""
            except (RetailcastError, ValueError) as exc:
                out, err = {}, f"{type(exc).__name__}: {exc}"
            results = []
            for s in series:
                if s.series_id in out:
                    mean = np.maximum(out[s.series_id], 0.0) if config.clamp_negative else out[s.series_id]
                    results.append((s.series_id, mean, rmse(s.values[-h:], mean), ""))
                else:
                    results.append((s.series_id, None, float("nan"), err))
        else:
            results = Parallel(n_jobs=config.n_jobs)(
                delayed(_per_product)(s, model, h, config.clamp_negative, config.arima_max_order, holidays)
                for s in series
            )
        forecasts[model] = {}
        for sid, mean, score, err in results:
            records.append({"product_id": sid, "cat_id": cat_of[sid], "model": model, "rmse": score, "error": err})
            if mean is not None:
                forecasts[model][sid] = np.asarray(mean, dtype=np.float64)
            else:
                logger.warning("%s failed on %s: %s", model, sid, err)

    detail = pd.DataFrame(records, columns=["product_id", "cat_id", "model", "rmse", "error"])
    table = rmse_table(detail, list(config.categories), list(config.models))
    out_dir = config.output_dir
    os.makedirs(out_dir, exist_ok=True)
    table.to_csv(os.path.join(out_dir, "rmse_table.csv"), index=False, lineterminator="\n")
    detail.to_csv(os.path.join(out_dir, "detail.csv"), index=False, lineterminator="\n")
    with open(os.path.join(out_dir, "forecasts.json"), "w", encoding="utf-8") as fh:
        json.dump({m: {k: v.tolist() for k, v in f.items()} for m, f in forecasts.items()}, fh)
    return BenchmarkResult(table, detail, forecasts)


def export_forecasts(results, path, clamp=True):
    """Write forecasts as ``id, F1 .. F<h>`` rows.

    Parameters
    ----------
    results : mapping
        series id -> forecast values (array-like or :class:`ForecastResult`);
        every series must share one horizon.
    """
    rows, horizon = [], None
    for sid, fc in results.items():
        values = np.asarray(fc.mean if isinstance(fc, ForecastResult) else fc, dtype=np.float64)
        if horizon is None:
            horizon = values.shape[0]
        elif values.shape[0] != horizon:
            raise InvalidArgumentError("all forecasts must share the same horizon")
        if clamp:
            values = np.maximum(values, 0.0)
        rows.append([sid, *values.tolist()])
    cols = ["id"] + [f"F{i}" for i in range(1, (horizon or 0) + 1)]
    frame = pd.DataFrame(rows, columns=cols)
    frame.to_csv(path, index=False, float_format="%.17g", lineterminator="\n")
    return frame


def read_forecasts(path):
    frame = pd.read_csv(path, dtype={"id": str}, float_precision="round_trip")
    return {row[0]: np.asarray(row[1:], dtype=np.float64) for row in frame.itertuples(index=False)}

