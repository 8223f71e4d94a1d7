"""Strict parsers for the M5-layout CSV files, wide/long reshaping and joins.

Every schema violation is reported with the file path and the 1-based
physical line number (the header is line 1).
"""

import csv
import logging
import os
import re

import numpy as np
import pandas as pd

from .exceptions import DataIntegrityError, InvalidArgumentError, ParseError

logger = logging.getLogger(__name__)

ID_COLUMNS = ["id", "item_id", "dept_id", "cat_id", "store_id", "state_id"]
CALENDAR_REQUIRED = ["date", "wm_yr_wk", "weekday", "wday", "month", "year", "d", "event_name_1", "event_type_1"]
CALENDAR_OPTIONAL = ["event_name_2", "event_type_2"]
PRICE_COLUMNS = ["store_id", "item_id", "wm_yr_wk", "sell_price"]
LONG_COLUMNS = ID_COLUMNS + ["day", "unit_sales"]

_DAY_LABEL = re.compile(r"^d_(\d+)$")
_DATE = re.compile(r"^\d{4}-\d{2}-\d{2}$")


def _read_header(path):
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            header = next(csv.reader(fh), None)
    except FileNotFoundError as exc:
        raise ParseError("file not found", path=path) from exc
    except UnicodeDecodeError as exc:
        raise ParseError("file is not valid UTF-8", path=path) from exc
    if not header:
        raise ParseError("empty file", path=path, line=1)
    return header


def _require(header, required, path):
    missing = [c for c in required if c not in header]
    if missing:
        raise ParseError(f"missing required column(s) {missing}", path=path, line=1)


def _day_number(label):
    m = _DAY_LABEL.match(label)
    return int(m.group(1)) if m else None


def _scan_for_bad_value(path, columns, convert):
    """Slow path: find the first line whose ``columns`` fail ``convert``."""
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        idx = [header.index(c) for c in columns]
        for lineno, row in enumerate(reader, start=2):
            if len(row) != len(header):
                raise ParseError(f"expected {len(header)} fields, found {len(row)}", path=path, line=lineno)
            for j, name in zip(idx, columns):
                try:
                    convert(row[j])
                except ValueError:
                    raise ParseError(f"column {name}: cannot parse {row[j]!r}", path=path, line=lineno) from None
    raise ParseError("file could not be parsed", path=path)


def parse_calendar(path):
    """Read ``calendar.csv``.

    Returns a DataFrame with the required columns, the optional second event
    slot, any ``snap_*`` flags, and an integer ``day`` column parsed from the
    ``d`` label. Other columns are dropped with a warning.
    """
    header = _read_header(path)
    _require(header, CALENDAR_REQUIRED, path)
    snaps = [c for c in header if c.startswith("snap_")]
    known = set(CALENDAR_REQUIRED + CALENDAR_OPTIONAL + snaps)
    extra = [c for c in header if c not in known]
    if extra:
        logger.warning("%s: ignoring unknown column(s) %s", path, extra)
    raw = pd.read_csv(path, dtype=str, keep_default_na=False, encoding="utf-8")
    out = pd.DataFrame()
    prev_date = None
    days = np.empty(len(raw), dtype=np.int64)
    for i, (date, label) in enumerate(zip(raw["date"], raw["d"])):
        line = i + 2
        if not _DATE.match(date):
            raise ParseError(f"malformed date {date!r}", path=path, line=line)
        try:
            parsed = pd.Timestamp(date)
        except ValueError:
            raise ParseError(f"malformed date {date!r}", path=path, line=line) from None
        if prev_date is not None and parsed <= prev_date:
            raise ParseError(f"date {date} does not increase", path=path, line=line)
        prev_date = parsed
        n = _day_number(label)
        if n != i + 1:
            raise ParseError(f"expected day label d_{i + 1}, found {label!r}", path=path, line=line)
        days[i] = n
    out["date"] = raw["date"]
    for col in ["wm_yr_wk", "wday", "month", "year"]:
        try:
            out[col] = raw[col].astype(np.int64)
        except ValueError:
            bad = next(i for i, v in enumerate(raw[col]) if not v.lstrip("-").isdigit())
            raise ParseError(f"column {col}: not an integer {raw[col][bad]!r}", path=path, line=bad + 2) from None
    bad_wday = np.flatnonzero((out["wday"] < 1) | (out["wday"] > 7))
    if bad_wday.size:
        raise ParseError("wday outside 1..7", path=path, line=int(bad_wday[0]) + 2)
    out["weekday"] = raw["weekday"]
    out["d"] = raw["d"]
    out["day"] = days
    for col in ["event_name_1", "event_type_1"] + CALENDAR_OPTIONAL:
        if col in raw.columns:
            out[col] = raw[col].mask(raw[col] == "")
        else:
            out[col] = np.nan
    for col in snaps:
        try:
            out[col] = raw[col].astype(np.int64)
        except ValueError:
            _scan_for_bad_value(path, [col], int)
    return out


def parse_sales_wide(path):
    """Read a wide sales file (``id .. state_id, d_1 .. d_N``).

    Returns a DataFrame with string id columns and int64 day columns.
    Negative sales raise :class:`DataIntegrityError` naming the line.
    """
    header = _read_header(path)
    _require(header, ID_COLUMNS, path)
    day_cols = [c for c in header if c not in ID_COLUMNS]
    for j, c in enumerate(day_cols):
        if _day_number(c) != j + 1:
            raise ParseError(f"day columns must run d_1..d_N consecutively; found {c!r} at position {j + 1}", path=path, line=1)
    if not day_cols:
        raise ParseError("no day columns", path=path, line=1)
    dtypes = {c: str for c in ID_COLUMNS}
    dtypes.update({c: np.int64 for c in day_cols})
    try:
        frame = pd.read_csv(path, dtype=dtypes, keep_default_na=False, encoding="utf-8")
    except (ValueError, pd.errors.ParserError):
        _scan_for_bad_value(path, day_cols, int)
    values = frame[day_cols].to_numpy()
    neg = np.argwhere(values < 0)
    if neg.size:
        i, j = neg[0]
        raise DataIntegrityError(f"{path}:{i + 2}: negative sales {values[i, j]} in {day_cols[j]}")
    if frame["id"].duplicated().any():
        i = int(np.flatnonzero(frame["id"].duplicated().to_numpy())[0])
        raise DataIntegrityError(f"{path}:{i + 2}: duplicate series id {frame['id'][i]!r}")
    return frame[ID_COLUMNS + day_cols]


def parse_prices(path):
    """Read ``sell_prices.csv``; (store, item, week) must be unique and prices positive."""
    header = _read_header(path)
    _require(header, PRICE_COLUMNS, path)
    dtypes = {"store_id": str, "item_id": str, "wm_yr_wk": np.int64, "sell_price": np.float64}
    try:
        frame = pd.read_csv(path, dtype=dtypes, usecols=PRICE_COLUMNS, keep_default_na=False, encoding="utf-8")
    except (ValueError, pd.errors.ParserError):
        _scan_for_bad_value(path, ["wm_yr_wk", "sell_price"], float)
    price = frame["sell_price"].to_numpy()
    bad = np.flatnonzero(~(np.isfinite(price) & (price > 0)))
    if bad.size:
        raise DataIntegrityError(f"{path}:{int(bad[0]) + 2}: sell_price must be positive, got {price[bad[0]]}")
    dup = frame.duplicated(["store_id", "item_id", "wm_yr_wk"]).to_numpy()
    if dup.any():
        i = int(np.flatnonzero(dup)[0])
        row = frame.iloc[i]
        raise DataIntegrityError(
            f"{path}:{i + 2}: duplicate price row for ({row['store_id']}, {row['item_id']}, {row['wm_yr_wk']})"
        )
    return frame[PRICE_COLUMNS]


def day_columns(sales):
    return [c for c in sales.columns if c not in ID_COLUMNS]


def melt_wide_to_long(sales):
    """Reshape wide sales to one row per (series, day), ordered by row then ascending day.

    Id columns come back as pandas categoricals to keep memory proportional
    to the number of series rather than the number of rows.
    """
    days = day_columns(sales)
    n_series, n_days = len(sales), len(days)
    day_idx = np.array([_day_number(c) for c in days], dtype=np.int64)
    out = {}
    for col in ID_COLUMNS:
        cat = pd.Categorical(sales[col].to_numpy(), categories=pd.unique(sales[col]))
        out[col] = pd.Categorical.from_codes(np.repeat(cat.codes, n_days), categories=cat.categories)
    out["day"] = np.tile(day_idx, n_series)
    out["unit_sales"] = sales[days].to_numpy().reshape(-1)
    return pd.DataFrame(out)


def pivot_long_to_wide(long):
    """Inverse of :func:`melt_wide_to_long` (series in first-appearance order)."""
    order = pd.unique(long["id"])
    ids = long.drop_duplicates("id").set_index("id").loc[order, ID_COLUMNS[1:]].reset_index()
    grid = long.pivot(index="id", columns="day", values="unit_sales").loc[order]
    grid = grid.reindex(sorted(grid.columns), axis=1)
    grid.columns = [f"d_{d}" for d in grid.columns]
    out = pd.concat([ids.reset_index(drop=True), grid.reset_index(drop=True)], axis=1)
    for col in ID_COLUMNS:
        out[col] = out[col].astype(str)
    return out


def merge_all(long, calendar, prices=None):
    """Left-join calendar (on day) and prices (on store, item, week) onto long sales.

    Raises
    ------
    DataIntegrityError
        When a sales day is missing from the calendar, or a join key is
        duplicated so the join would add rows.
    """
    if calendar["day"].duplicated().any():
        raise DataIntegrityError("calendar has duplicate day labels; join would fan out")
    missing = np.setdiff1d(pd.unique(long["day"]), calendar["day"].to_numpy())
    if missing.size:
        raise DataIntegrityError(f"day d_{int(missing[0])} in sales is absent from the calendar")
    n = len(long)
    merged = long.merge(calendar, on="day", how="left", sort=False)
    if prices is not None:
        keys = ["store_id", "item_id", "wm_yr_wk"]
        if prices.duplicated(keys).any():
            raise DataIntegrityError("prices have duplicate (store_id, item_id, wm_yr_wk) keys; join would fan out")
        left = merged.assign(
            store_id=merged["store_id"].astype(str), item_id=merged["item_id"].astype(str)
        )
        merged = left.merge(prices, on=keys, how="left", sort=False)
        for col in ("store_id", "item_id"):
            merged[col] = long[col].to_numpy()
    if len(merged) != n:
        raise DataIntegrityError(f"join changed row count from {n} to {len(merged)}")
    return merged


def write_long_csv(long, path):
    """Long-format CSV with header ``id,item_id,dept_id,cat_id,store_id,state_id,day,unit_sales``."""
    long[LONG_COLUMNS].to_csv(path, index=False, lineterminator="\n")


def find_m5_files(data_dir):
    """Locate calendar, sales and price files in an M5-layout directory."""
    if not os.path.isdir(data_dir):
        raise InvalidArgumentError(f"data directory {data_dir!r} does not exist")
    names = os.listdir(data_dir)
    sales = None
    for candidate in ("sales_train_validation.csv", "sales_train_evaluation.csv"):
        if candidate in names:
            sales = os.path.join(data_dir, candidate)
            break
    paths = {
        "calendar": os.path.join(data_dir, "calendar.csv"),
        "sales": sales,
        "prices": os.path.join(data_dir, "sell_prices.csv"),
    }
    absent = [k for k, p in paths.items() if p is None or not os.path.isfile(p)]
    if absent:
        raise InvalidArgumentError(f"{data_dir}: missing M5 file(s) for {absent}")
    return paths
