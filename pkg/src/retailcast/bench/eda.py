"""Exploratory statistics on the merged long table."""

from dataclasses import dataclass, field

import numpy as np
import pandas as pd


@dataclass
class EventPriceStats:
    """Event-day versus normal-day pricing per product.

    ``empty`` is set (and every other field left at its default) when the
    data contains no event days.
    """

    empty: bool = False
    n_products: int = 0
    fraction_discounted: float = float("nan")
    fraction_increased: float = float("nan")
    mean_normal_price: float = float("nan")
    mean_event_price: float = float("nan")
    discounts_by_department: dict = field(default_factory=dict)
    per_product: pd.DataFrame = None

    def to_dict(self):
        return {
            "empty": self.empty,
            "n_products": self.n_products,
            "fraction_discounted": None if self.empty else self.fraction_discounted,
            "fraction_increased": None if self.empty else self.fraction_increased,
            "mean_normal_price": None if self.empty else self.mean_normal_price,
            "mean_event_price": None if self.empty else self.mean_event_price,
            "discounts_by_department": dict(self.discounts_by_department),
        }


def eda_event_price_stats(merged):
    """Compare each product's mean price on event days with its mean on other days.

    A product counts as discounted when its event-day mean is strictly
    lower, increased when strictly higher; equal means count as neither.
    Products without priced rows on both kinds of day are left out.
    """
    frame = merged[["id", "dept_id", "event_name_1", "sell_price"]]
    is_event = frame["event_name_1"].notna().to_numpy()
    if not is_event.any():
        return EventPriceStats(empty=True)
    priced = frame[frame["sell_price"].notna().to_numpy()]
    ev = priced["event_name_1"].notna()
    keys = ["id", "dept_id"]
    event_mean = priced[ev.to_numpy()].groupby(keys, sort=False, observed=True)["sell_price"].mean()
    normal_mean = priced[~ev.to_numpy()].groupby(keys, sort=False, observed=True)["sell_price"].mean()
    both = pd.concat([normal_mean.rename("normal_price"), event_mean.rename("event_price")], axis=1, join="inner")
    if both.empty:
        return EventPriceStats(empty=True)
    both = both.reset_index()
    both["discounted"] = both["event_price"] < both["normal_price"]
    both["increased"] = both["event_price"] > both["normal_price"]
    by_dept = both.groupby("dept_id", sort=True, observed=True)["discounted"].sum()
    return EventPriceStats(
        empty=False,
        n_products=len(both),
        fraction_discounted=float(both["discounted"].mean()),
        fraction_increased=float(both["increased"].mean()),
        mean_normal_price=float(both["normal_price"].mean()),
        mean_event_price=float(both["event_price"].mean()),
        discounts_by_department={str(k): int(v) for k, v in by_dept.items()},
        per_product=both,
    )


def eda_sales_summaries(merged):
    """Aggregates for plotting: units by category, units by weekday, price over time by category.

    Returns
    -------
    dict of DataFrame
        ``units_by_category`` (cat_id, units, share), ``units_by_weekday``
        (weekday, units) and ``price_over_time`` (cat_id, date, mean, std).
    """
    units = merged["unit_sales"].astype(np.float64)
    total = float(units.sum())
    by_cat = units.groupby(merged["cat_id"].astype(str), sort=True).sum().rename("units").reset_index()
    by_cat["share"] = by_cat["units"] / total if total > 0 else np.nan
    by_wd = units.groupby(merged["weekday"].astype(str), sort=False).sum().rename("units").reset_index()
    out = {"units_by_category": by_cat, "units_by_weekday": by_wd}
    if "sell_price" in merged.columns:
        time_key = "date" if "date" in merged.columns else "day"
        priced = merged[merged["sell_price"].notna().to_numpy()]
        g = priced.groupby([priced["cat_id"].astype(str), priced[time_key]], sort=True)["sell_price"]
        band = g.agg(["mean", "std"]).reset_index()
        band.columns = ["cat_id", time_key, "mean", "std"]
        out["price_over_time"] = band
    return out
