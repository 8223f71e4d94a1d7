"""Small M5-layout datasets for tests and demos."""

import os

import numpy as np
import pandas as pd

_EVENTS = [("SuperBowl", "Sporting"), ("ValentinesDay", "Cultural"), ("Easter", "Cultural"), ("Thanksgiving", "National")]


def make_calendar(n_days, start="2011-01-29", event_every=37):
    dates = pd.date_range(start, periods=n_days, freq="D")
    # M5 numbers weekdays from Saturday=1
    wday = ((dates.dayofweek + 2) % 7) + 1
    week_id = 11101 + ((np.arange(n_days) + 0) // 7)
    names, types = [], []
    for i in range(n_days):
        if event_every and i % event_every == event_every - 1:
            nm, tp = _EVENTS[(i // event_every) % len(_EVENTS)]
        else:
            nm, tp = "", ""
        names.append(nm)
        types.append(tp)
    return pd.DataFrame(
        {
            "date": dates.strftime("%Y-%m-%d"),
            "wm_yr_wk": week_id,
            "weekday": dates.day_name(),
            "wday": wday,
            "month": dates.month,
            "year": dates.year,
            "d": [f"d_{i}" for i in range(1, n_days + 1)],
            "event_name_1": names,
            "event_type_1": types,
            "event_name_2": "",
            "event_type_2": "",
            "snap_CA": (dates.day <= 10).astype(int),
            "snap_TX": (dates.day <= 10).astype(int),
            "snap_WI": (dates.day <= 10).astype(int),
        }
    )


def make_dataset(n_per_category=3, n_days=120, categories=("FOODS", "HOBBIES", "HOUSEHOLD"), seed=0, constant=None):
    """Wide sales, calendar and prices with weekly seasonality and poisson noise.

    ``constant`` replaces every series by that constant value.
    """
    rng = np.random.default_rng(seed)
    cal = make_calendar(n_days)
    t = np.arange(n_days)
    weekly = 1.0 + 0.3 * np.isin(cal["wday"].to_numpy(), [1, 2])
    rows, prices = [], []
    for cat in categories:
        for j in range(n_per_category):
            item = f"{cat}_1_{j + 1:03d}"
            store = "CA_1"
            level = rng.uniform(0.5, 4.0)
            if constant is not None:
                sales = np.full(n_days, constant, dtype=np.int64)
            else:
                sales = rng.poisson(level * weekly * (1 + 0.001 * t))
            rows.append([f"{item}_{store}_validation", item, f"{cat}_1", cat, store, "CA", *sales.tolist()])
            base = round(rng.uniform(1.0, 10.0), 2)
            for wk in np.unique(cal["wm_yr_wk"]):
                prices.append([store, item, int(wk), round(base * (0.9 if wk % 5 == 0 else 1.0), 2)])
    cols = ["id", "item_id", "dept_id", "cat_id", "store_id", "state_id"] + [f"d_{i}" for i in range(1, n_days + 1)]
    sales = pd.DataFrame(rows, columns=cols)
    price = pd.DataFrame(prices, columns=["store_id", "item_id", "wm_yr_wk", "sell_price"])
    return sales, cal, price


def write_dataset(directory, **kwargs):
    """Write ``calendar.csv``, ``sales_train_validation.csv`` and ``sell_prices.csv``; return their paths."""
    os.makedirs(directory, exist_ok=True)
    sales, cal, price = make_dataset(**kwargs)
    paths = {
        "calendar": os.path.join(directory, "calendar.csv"),
        "sales": os.path.join(directory, "sales_train_validation.csv"),
        "prices": os.path.join(directory, "sell_prices.csv"),
    }
    cal.to_csv(paths["calendar"], index=False, lineterminator="\n")
    sales.to_csv(paths["sales"], index=False, lineterminator="\n")
    price.to_csv(paths["prices"], index=False, lineterminator="\n")
    return paths
