import numpy as np
import pandas as pd
import pytest

from retailcast.bench.synthetic import make_dataset, write_dataset
from retailcast.exceptions import DataIntegrityError, InvalidArgumentError, ParseError
from retailcast.ingest import (
    LONG_COLUMNS,
    find_m5_files,
    melt_wide_to_long,
    merge_all,
    parse_calendar,
    parse_prices,
    parse_sales_wide,
    pivot_long_to_wide,
    write_long_csv,
)

CAL_HEADER = "date,wm_yr_wk,weekday,wday,month,year,d,event_name_1,event_type_1,event_name_2,event_type_2,snap_CA"
SALES_HEADER = "id,item_id,dept_id,cat_id,store_id,state_id"


def write(tmp_path, name, text):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


def calendar_text(rows=3, event_row=2):
    lines = [CAL_HEADER]
    for i in range(1, rows + 1):
        ev = "SuperBowl,Sporting" if i == event_row else ","
        date = (pd.Timestamp("2011-01-28") + pd.Timedelta(days=i)).strftime("%Y-%m-%d")
        lines.append(f"{date},11101,Saturday,{(i - 1) % 7 + 1},1,2011,d_{i},{ev},,,0")
    return "\n".join(lines) + "\n"


class TestCalendar:
    def test_three_rows(self, tmp_path):
        cal = parse_calendar(write(tmp_path, "c.csv", calendar_text()))
        assert len(cal) == 3
        assert list(cal["d"]) == ["d_1", "d_2", "d_3"]
        assert list(cal["day"]) == [1, 2, 3]
        assert cal["event_name_1"].notna().tolist() == [False, True, False]
        assert cal.loc[1, "event_name_1"] == "SuperBowl"

    def test_missing_column(self, tmp_path):
        text = calendar_text().replace("wm_yr_wk,", "", 1)
        with pytest.raises(ParseError):
            parse_calendar(write(tmp_path, "c.csv", text))

    def test_bad_date_line_number(self, tmp_path):
        text = calendar_text(4).replace("2011-01-31", "2011-13-31")
        with pytest.raises(ParseError) as info:
            parse_calendar(write(tmp_path, "c.csv", text))
        assert info.value.line == 4
        assert ":4" in str(info.value)

    def test_non_consecutive_days(self, tmp_path):
        text = calendar_text(4).replace("d_3,", "d_5,")
        with pytest.raises(ParseError) as info:
            parse_calendar(write(tmp_path, "c.csv", text))
        assert info.value.line == 4

    def test_extra_column_warns(self, tmp_path, caplog):
        text = calendar_text().replace("snap_CA", "snap_CA,mystery", 1).replace(",0\n", ",0,x\n")
        cal = parse_calendar(write(tmp_path, "c.csv", text))
        assert "mystery" not in cal.columns
        assert "mystery" in caplog.text


class TestSalesAndPrices:
    def test_grid(self, tmp_path):
        text = f"{SALES_HEADER},d_1,d_2,d_3,d_4,d_5\n" \
               "A_1_001_CA_1_validation,A_1_001,A_1,A,CA_1,CA,0,1,2,3,4\n" \
               "A_1_002_CA_1_validation,A_1_002,A_1,A,CA_1,CA,5,0,0,1,0\n"
        sales = parse_sales_wide(write(tmp_path, "s.csv", text))
        assert sales.shape == (2, 11)
        assert sales.iloc[:, 6:].to_numpy().tolist() == [[0, 1, 2, 3, 4], [5, 0, 0, 1, 0]]

    def test_negative(self, tmp_path):
        text = f"{SALES_HEADER},d_1,d_2\nx,i,d,c,s,st,1,-2\n"
        with pytest.raises(DataIntegrityError, match="negative"):
            parse_sales_wide(write(tmp_path, "s.csv", text))

    def test_non_integer_line(self, tmp_path):
        text = f"{SALES_HEADER},d_1,d_2\nx,i,d,c,s,st,1,2\ny,i,d,c,s,st,1,two\n"
        with pytest.raises(ParseError) as info:
            parse_sales_wide(write(tmp_path, "s.csv", text))
        assert info.value.line == 3

    def test_duplicate_prices(self, tmp_path):
        text = "store_id,item_id,wm_yr_wk,sell_price\nCA_1,A,11101,1.5\nCA_1,A,11101,1.7\n"
        with pytest.raises(DataIntegrityError, match="duplicate"):
            parse_prices(write(tmp_path, "p.csv", text))

    def test_non_positive_price(self, tmp_path):
        text = "store_id,item_id,wm_yr_wk,sell_price\nCA_1,A,11101,0\n"
        with pytest.raises(DataIntegrityError):
            parse_prices(write(tmp_path, "p.csv", text))

    def test_find_files(self, tmp_path):
        paths = write_dataset(tmp_path, n_per_category=1, n_days=20)
        assert find_m5_files(tmp_path) == paths
        with pytest.raises(InvalidArgumentError):
            find_m5_files(tmp_path / "nope")


class TestReshape:
    def test_two_by_five(self):
        sales, _, _ = make_dataset(n_per_category=2, n_days=5, categories=("FOODS",))
        long = melt_wide_to_long(sales)
        assert len(long) == 10
        assert not long.duplicated(["id", "day"]).any()
        assert list(long.columns) == LONG_COLUMNS

    def test_round_trip_10x30(self):
        sales, _, _ = make_dataset(n_per_category=5, n_days=30, categories=("FOODS", "HOBBIES"))
        back = pivot_long_to_wide(melt_wide_to_long(sales))
        pd.testing.assert_frame_equal(back, sales, check_dtype=False)

    def test_500_spot_probes(self):
        sales, _, _ = make_dataset(n_per_category=4, n_days=50, seed=2)
        long = melt_wide_to_long(sales)
        r = np.random.default_rng(0)
        for _ in range(500):
            i, d = int(r.integers(0, len(sales))), int(r.integers(1, 51))
            row = long.iloc[i * 50 + d - 1]
            assert row["id"] == sales.loc[i, "id"] and row["day"] == d
            assert row["unit_sales"] == sales.loc[i, f"d_{d}"]

    def test_order_and_conservation(self):
        sales, _, _ = make_dataset(n_per_category=3, n_days=40)
        long = melt_wide_to_long(sales)
        assert list(pd.unique(long["id"])) == list(sales["id"])
        assert long["unit_sales"].sum() == sales.iloc[:, 6:].to_numpy().sum()

    def test_long_csv(self, tmp_path):
        sales, _, _ = make_dataset(n_per_category=1, n_days=3, categories=("FOODS",))
        path = tmp_path / "long.csv"
        write_long_csv(melt_wide_to_long(sales), path)
        lines = path.read_text().splitlines()
        assert lines[0] == "id,item_id,dept_id,cat_id,store_id,state_id,day,unit_sales"
        assert len(lines) == 4


class TestMerge:
    def fixture(self):
        sales, cal, prices = make_dataset(n_per_category=2, n_days=14, categories=("FOODS",), seed=5)
        cal = cal.mask(cal == "")
        cal.loc[3, ["event_name_1", "event_type_1"]] = ["Easter", "Cultural"]
        cal["day"] = np.arange(1, 15)
        # item 2 has no price in the first week
        prices = prices[~((prices["item_id"] == "FOODS_1_002") & (prices["wm_yr_wk"] == 11101))]
        return sales, cal, prices

    def test_hand_join(self):
        sales, cal, prices = self.fixture()
        merged = merge_all(melt_wide_to_long(sales), cal, prices)
        assert len(merged) == 28
        cal_rows = {int(r.day): r for r in cal.itertuples()}
        price_of = {(r.store_id, r.item_id, r.wm_yr_wk): r.sell_price for r in prices.itertuples()}
        for i, s in sales.iterrows():
            for d in range(1, 15):
                row = merged.iloc[i * 14 + d - 1]
                c = cal_rows[d]
                assert row["unit_sales"] == s[f"d_{d}"]
                assert row["date"] == c.date and row["wm_yr_wk"] == c.wm_yr_wk
                ev = row["event_name_1"]
                assert (ev == c.event_name_1) if isinstance(c.event_name_1, str) else pd.isna(ev)
                expected = price_of.get((s["store_id"], s["item_id"], c.wm_yr_wk))
                if expected is None:
                    assert np.isnan(row["sell_price"])
                else:
                    assert row["sell_price"] == expected
        assert merged.loc[merged["day"] == 4, "event_name_1"].eq("Easter").all()
        assert merged["unit_sales"].sum() == sales.iloc[:, 6:].to_numpy().sum()

    def test_fan_out(self):
        sales, cal, prices = self.fixture()
        with pytest.raises(DataIntegrityError):
            merge_all(melt_wide_to_long(sales), cal, pd.concat([prices, prices.iloc[:1]]))
        with pytest.raises(DataIntegrityError):
            merge_all(melt_wide_to_long(sales), pd.concat([cal, cal.iloc[:1]]), prices)

    def test_missing_day(self):
        sales, cal, prices = self.fixture()
        with pytest.raises(DataIntegrityError, match="d_14"):
            merge_all(melt_wide_to_long(sales), cal.iloc[:13], prices)

    def test_parse_written_files(self, tmp_path):
        paths = write_dataset(tmp_path, n_per_category=2, n_days=30)
        cal = parse_calendar(paths["calendar"])
        sales = parse_sales_wide(paths["sales"])
        prices = parse_prices(paths["prices"])
        merged = merge_all(melt_wide_to_long(sales), cal, prices)
        assert len(merged) == 6 * 30
        assert merged["sell_price"].notna().all()
