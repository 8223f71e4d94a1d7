"""Shared hand-built fixtures and brute-force oracles."""

import datetime as dt
import math

import pandas as pd

from retailcast.bench.synthetic import make_calendar

NAN = float("nan")


def forty_day_fixture():
    """One series over 40 days with two events and a weekly price that changes once."""
    days = list(range(1, 41))
    sales = [(d * 7) % 5 + d // 10 for d in days]
    long_sales = pd.DataFrame({
        "id": "FOODS_1_001_CA_1_validation", "item_id": "FOODS_1_001", "dept_id": "FOODS_1",
        "cat_id": "FOODS", "store_id": "CA_1", "state_id": "CA", "day": days, "unit_sales": sales,
    })
    cal = make_calendar(40, start="2016-02-27", event_every=0)
    cal.loc[8, ["event_name_1", "event_type_1"]] = ["Purim End", "Religious"]
    cal.loc[20, ["event_name_1", "event_type_1"]] = ["StPatricksDay", "Cultural"]
    cal.loc[30, ["event_name_1", "event_type_1"]] = ["Purim End", "Religious"]
    cal = cal.mask(cal == "")
    weeks = sorted(set(cal["wm_yr_wk"]))
    prices = pd.DataFrame({
        "store_id": "CA_1", "item_id": "FOODS_1_001", "wm_yr_wk": weeks[1:],
        "sell_price": [2.5 if i < 3 else 2.25 for i in range(len(weeks) - 1)],
    })
    return long_sales, cal, prices


def hand_table(long_sales, cal, prices):
    """Spreadsheet-style recomputation with plain Python loops, row by row."""
    y = list(long_sales["unit_sales"])
    n = len(y)
    names, types = {}, {}
    for nm, tp in zip(cal["event_name_1"], cal["event_type_1"]):
        if isinstance(nm, str):
            names.setdefault(nm, len(names) + 1)
        if isinstance(tp, str):
            types.setdefault(tp, len(types) + 1)
    price_of = {(r.store_id, r.item_id, r.wm_yr_wk): r.sell_price for r in prices.itertuples()}
    rows = []
    for i in range(n):
        row = {"day": i + 1, "target": float(y[i])}
        for k in (7, 28):
            row[f"lag_{k}"] = float(y[i - k]) if i - k >= 0 else NAN
            for w in (7, 28):
                window = [y[j - k] if j - k >= 0 else None for j in range(i - w + 1, i + 1)]
                ok = i - w + 1 >= 0 and all(v is not None for v in window)
                row[f"rmean_{w}_{k}"] = sum(window) / w if ok else NAN
        date = dt.date.fromisoformat(cal["date"].iloc[i])
        row["week"] = date.isocalendar()[1]
        row["quarter"] = math.ceil(date.month / 3)
        row["mday"] = date.day
        row["wday"] = int(cal["wday"].iloc[i])
        nm, tp = cal["event_name_1"].iloc[i], cal["event_type_1"].iloc[i]
        row["event_name"] = names[nm] if isinstance(nm, str) else 0
        row["event_type"] = types[tp] if isinstance(tp, str) else 0
        for col in ("item_id", "dept_id", "cat_id", "store_id", "state_id"):
            row[col] = 0
        row["sell_price"] = price_of.get(("CA_1", "FOODS_1_001", int(cal["wm_yr_wk"].iloc[i])), NAN)
        rows.append(row)
    return pd.DataFrame(rows)
