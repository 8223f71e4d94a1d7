"""Feature matrix for the pooled tree model: sales lags, rolling means of lags,
calendar fields, event ids, entity ids and the joined sell price.

Missing values are NaN throughout; the tree learner routes them to a learned
default branch, so no placeholder number is ever substituted.
"""

import datetime as _dt

import numpy as np
import pandas as pd

from ._validation import as_float_vector, check_positive_int
from .core import TimeSeries
from .exceptions import DataIntegrityError, InvalidArgumentError

LAGS = (7, 28)
WINDOWS = (7, 28)
LAG_COLUMNS = ["lag_7", "lag_28"]
RMEAN_COLUMNS = ["rmean_7_7", "rmean_28_7", "rmean_7_28", "rmean_28_28"]
CALENDAR_COLUMNS = ["week", "quarter", "mday", "wday"]
EVENT_COLUMNS = ["event_name", "event_type"]
ENTITY_COLUMNS = ["item_id", "dept_id", "cat_id", "store_id", "state_id"]

# fixed header order of the serialized feature matrix
FEATURE_MATRIX_COLUMNS = (
    ["series_id", "day", "target"]
    + LAG_COLUMNS
    + RMEAN_COLUMNS
    + CALENDAR_COLUMNS
    + EVENT_COLUMNS
    + ENTITY_COLUMNS
    + ["sell_price"]
)
MODEL_FEATURES = FEATURE_MATRIX_COLUMNS[3:]
CATEGORICAL_FEATURES = EVENT_COLUMNS + ENTITY_COLUMNS


def _values(series):
    if isinstance(series, TimeSeries):
        return np.asarray(series.values, dtype=np.float64)
    return as_float_vector(series, "series", allow_nan=True)


def make_lag(series, k):
    """Shift a series forward by ``k`` steps; the first ``k`` entries are NaN."""
    x = _values(series)
    k = check_positive_int(k, "k")
    if k >= x.shape[0]:
        raise InvalidArgumentError(f"lag {k} must be shorter than the series length {x.shape[0]}")
    out = np.full(x.shape[0], np.nan)
    out[k:] = x[:-k]
    return out


def rolling_mean(values, window):
    """Trailing mean over ``window`` entries; NaN when any entry in the window is NaN or absent."""
    x = as_float_vector(values, "values", allow_empty=True, allow_nan=True)
    w = check_positive_int(window, "window")
    out = pd.Series(x).rolling(w, min_periods=w).mean().to_numpy()
    return out


def _as_date(date):
    if isinstance(date, _dt.datetime):
        return date.date()
    if isinstance(date, _dt.date):
        return date
    if isinstance(date, np.datetime64) or isinstance(date, pd.Timestamp):
        return pd.Timestamp(date).date()
    if isinstance(date, str):
        try:
            return _dt.date.fromisoformat(date)
        except ValueError as exc:
            raise InvalidArgumentError(f"invalid date {date!r}") from exc
    raise InvalidArgumentError(f"invalid date {date!r}")


def calendar_features(date):
    """ISO week, quarter, day of month and ISO weekday (Monday=1) of a date."""
    d = _as_date(date)
    iso = d.isocalendar()
    return {
        "week": int(iso[1]),
        "quarter": (d.month - 1) // 3 + 1,
        "mday": d.day,
        "wday": int(iso[2]),
    }


class CategoryEncoder:
    """Dense integer ids in first-appearance order.

    With ``reserve_zero`` the id 0 stands for "absent" (NaN or empty string)
    and real values start at 1; otherwise ids start at 0 and absent values
    map to NaN.
    """

    def __init__(self, reserve_zero=False):
        self.reserve_zero = reserve_zero
        self.mapping_ = {}

    @staticmethod
    def _absent(v):
        return v is None or (isinstance(v, float) and np.isnan(v)) or v == ""

    def fit(self, values):
        self.mapping_ = {}
        start = 1 if self.reserve_zero else 0
        for v in values:
            if self._absent(v) or v in self.mapping_:
                continue
            self.mapping_[v] = start + len(self.mapping_)
        return self

    def transform(self, values):
        absent = 0.0 if self.reserve_zero else np.nan
        return np.array(
            [absent if self._absent(v) else float(self.mapping_.get(v, np.nan)) for v in values],
            dtype=np.float64,
        )

    def fit_transform(self, values):
        values = list(values)
        return self.fit(values).transform(values)

    @property
    def categories_(self):
        return list(self.mapping_)


def event_encoders(calendar):
    """Encoders for event names and types, fitted on the calendar's first event slot."""
    names = CategoryEncoder(reserve_zero=True).fit(calendar["event_name_1"].tolist())
    types = CategoryEncoder(reserve_zero=True).fit(calendar["event_type_1"].tolist())
    return names, types


def event_features(row, encoders):
    """(event name id, event type id) for one calendar row; (0, 0) when there is no event."""
    names, types = encoders
    name = row.get("event_name_1") if hasattr(row, "get") else row["event_name_1"]
    kind = row.get("event_type_1") if hasattr(row, "get") else row["event_type_1"]
    return int(names.transform([name])[0]), int(types.transform([kind])[0])


def lag_block(Y, t):
    """Lag and rolling-mean features at column ``t`` of a (series x days) array.

    Entries outside the array (or NaN inside it) yield NaN, matching the
    column definitions of :func:`build_feature_matrix`.
    """
    Y = np.asarray(Y, dtype=np.float64)
    out = {}
    for k in LAGS:
        src = t - k
        out[f"lag_{k}"] = Y[:, src].copy() if src >= 0 else np.full(Y.shape[0], np.nan)
        for w in WINDOWS:
            lo, hi = t - k - w + 1, t - k + 1
            if lo < 0:
                out[f"rmean_{w}_{k}"] = np.full(Y.shape[0], np.nan)
            else:
                out[f"rmean_{w}_{k}"] = Y[:, lo:hi].mean(axis=1)
    return out


def _calendar_frame(calendar):
    cal = calendar.copy()
    if "day" not in cal.columns:
        cal["day"] = cal["d"].str.slice(2).astype(np.int64)
    dates = pd.to_datetime(cal["date"])
    iso = dates.dt.isocalendar()
    names, types = event_encoders(cal)
    frame = pd.DataFrame(
        {
            "day": cal["day"].to_numpy(np.int64),
            "wm_yr_wk": cal["wm_yr_wk"].to_numpy(np.int64),
            "week": iso["week"].to_numpy(np.int64),
            "quarter": dates.dt.quarter.to_numpy(np.int64),
            "mday": dates.dt.day.to_numpy(np.int64),
            "wday": cal["wday"].to_numpy(np.int64)
            if "wday" in cal.columns
            else iso["day"].to_numpy(np.int64),
            "event_name": names.transform(cal["event_name_1"].tolist()),
            "event_type": types.transform(cal["event_type_1"].tolist()),
        }
    )
    return frame


def build_feature_matrix(long_sales, calendar, prices=None):
    """Assemble one feature row per (series, day).

    Parameters
    ----------
    long_sales : DataFrame
        Columns ``id, item_id, dept_id, cat_id, store_id, state_id, day,
        unit_sales`` with consecutive days per series.
    calendar : DataFrame
        Parsed calendar (``date, wm_yr_wk, wday, d, event_name_1,
        event_type_1``, ...).
    prices : DataFrame, optional
        ``store_id, item_id, wm_yr_wk, sell_price``; the weekly price applies
        to every day of that week.

    Returns
    -------
    DataFrame
        Columns in :data:`FEATURE_MATRIX_COLUMNS` order, rows ordered by
        series first appearance then ascending day.
    """
    required = {"id", "day", "unit_sales", *ENTITY_COLUMNS}
    missing = required - set(long_sales.columns)
    if missing:
        raise InvalidArgumentError(f"long sales table lacks columns {sorted(missing)}")
    cal = _calendar_frame(calendar)
    known_days = set(cal["day"].tolist())
    sales_days = pd.unique(long_sales["day"])
    absent = [int(d) for d in sales_days if d not in known_days]
    if absent:
        raise DataIntegrityError(f"day d_{absent[0]} in sales is absent from the calendar")

    sales = long_sales.reset_index(drop=True)
    series_order = {sid: i for i, sid in enumerate(pd.unique(sales["id"]))}
    sales = sales.assign(_order=sales["id"].map(series_order).astype(np.int64))
    sales = sales.sort_values(["_order", "day"], kind="stable").reset_index(drop=True)
    gaps = sales.groupby("_order", sort=False)["day"].diff().dropna()
    if (gaps != 1).any():
        bad = sales.loc[gaps.index[(gaps != 1).to_numpy()][0]]
        raise DataIntegrityError(f"series {bad['id']} has non-consecutive days near day {int(bad['day'])}")

    out = pd.DataFrame(
        {
            "series_id": sales["id"].to_numpy(),
            "day": sales["day"].to_numpy(np.int64),
            "target": sales["unit_sales"].to_numpy(np.float64),
        }
    )
    grouped = out.groupby(sales["_order"], sort=False)["target"]
    for k in LAGS:
        out[f"lag_{k}"] = grouped.shift(k).to_numpy(np.float64)
    for k in LAGS:
        lag_group = out.groupby(sales["_order"], sort=False)[f"lag_{k}"]
        for w in WINDOWS:
            out[f"rmean_{w}_{k}"] = (
                lag_group.rolling(w, min_periods=w).mean().reset_index(level=0, drop=True).to_numpy(np.float64)
            )

    merged = sales[["day", "item_id", "store_id"]].merge(cal, on="day", how="left", validate="many_to_one")
    for col in CALENDAR_COLUMNS + EVENT_COLUMNS:
        out[col] = merged[col].to_numpy()
    for col in ENTITY_COLUMNS:
        out[col] = CategoryEncoder().fit_transform(sales[col].tolist())

    if prices is not None and len(prices):
        keys = ["store_id", "item_id", "wm_yr_wk"]
        if prices.duplicated(keys).any():
            raise DataIntegrityError("duplicate (store_id, item_id, wm_yr_wk) rows in prices")
        joined = merged[keys].merge(prices[keys + ["sell_price"]], on=keys, how="left", validate="many_to_one")
        out["sell_price"] = joined["sell_price"].to_numpy(np.float64)
    else:
        out["sell_price"] = np.nan
    return out[FEATURE_MATRIX_COLUMNS]


def write_feature_matrix(frame, path):
    """Write the matrix as CSV with the fixed header; missing values are empty fields."""
    frame[FEATURE_MATRIX_COLUMNS].to_csv(path, index=False, float_format="%.17g", lineterminator="\n")


def read_feature_matrix(path):
    frame = pd.read_csv(path, dtype={"series_id": str}, float_precision="round_trip")
    if list(frame.columns) != FEATURE_MATRIX_COLUMNS:
        raise DataIntegrityError(f"{path}: header does not match the feature matrix layout")
    return frame
