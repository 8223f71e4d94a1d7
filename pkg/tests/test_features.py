import hashlib

import numpy as np
import pandas as pd
import pytest
from fixtures import forty_day_fixture, hand_table

from retailcast.bench.synthetic import make_dataset
from retailcast.exceptions import DataIntegrityError, InvalidArgumentError
from retailcast.features import (
    FEATURE_MATRIX_COLUMNS,
    CategoryEncoder,
    build_feature_matrix,
    calendar_features,
    event_encoders,
    event_features,
    lag_block,
    make_lag,
    read_feature_matrix,
    rolling_mean,
    write_feature_matrix,
)
from retailcast.ingest import melt_wide_to_long

TABLE_ONE = {"lag_7", "lag_28", "rmean_7_7", "rmean_28_7", "rmean_7_28", "rmean_28_28", "week", "quarter", "mday"}


def brute_rmean(y, t, w, k):
    vals = []
    for j in range(t - w + 1, t + 1):
        if j < 0 or j - k < 0:
            return np.nan
        vals.append(y[j - k])
    return sum(vals) / w


class TestLagAndMean:
    def test_lag_examples(self):
        out = make_lag(np.arange(1, 11.0), 7)
        assert out[7] == 1
        assert np.all(np.isnan(out[:7]))
        const = make_lag(np.full(20, 3.0), 7)
        assert np.all(const[7:] == 3.0)

    def test_lag_too_long(self):
        with pytest.raises(InvalidArgumentError):
            make_lag(np.arange(5.0), 5)

    def test_rolling_examples(self):
        out = rolling_mean([1, 2, 3, 4, 5], 3)
        assert np.isnan(out[0]) and np.isnan(out[1])
        np.testing.assert_array_equal(out[2:], [2, 3, 4])
        c = rolling_mean(np.full(30, 4.0), 7)
        assert np.all(c[6:] == 4.0)

    def test_rolling_nan_propagates(self):
        out = rolling_mean([1, np.nan, 3, 4, 5, 6], 3)
        assert np.isnan(out[:4]).all()
        np.testing.assert_array_equal(out[4:], [4, 5])

    def test_ramp_rmean_7_7_brute_force(self):
        y = np.arange(100, dtype=float)
        composed = rolling_mean(make_lag(y, 7), 7)
        oracle = [brute_rmean(y, t, 7, 7) for t in range(100)]
        np.testing.assert_allclose(composed, oracle, equal_nan=True, rtol=1e-15)

    def test_lag_block_matches_columns(self):
        Y = np.random.default_rng(0).poisson(3, (4, 60)).astype(float)
        for t in (0, 10, 34, 35, 59):
            block = lag_block(Y, t)
            for i in range(4):
                assert np.array_equal(block["lag_7"][i], make_lag(Y[i], 7)[t], equal_nan=True)
                expected = brute_rmean(Y[i], t, 28, 7)
                assert np.array_equal(block["rmean_28_7"][i], expected, equal_nan=True) or \
                    block["rmean_28_7"][i] == pytest.approx(expected, rel=1e-14)


class TestCalendar:
    def test_examples(self):
        assert calendar_features("2016-01-01")["quarter"] == 1
        assert calendar_features("2016-01-01")["mday"] == 1
        assert calendar_features("2015-12-31") == {"week": 53, "quarter": 4, "mday": 31, "wday": 4}
        march = calendar_features("2016-03-08")
        assert (march["week"], march["quarter"], march["mday"]) == (10, 1, 8)

    def test_invalid(self):
        with pytest.raises(InvalidArgumentError):
            calendar_features("2016-02-30")


class TestEvents:
    def test_first_appearance(self):
        cal = pd.DataFrame({
            "event_name_1": [np.nan, "SuperBowl", np.nan, "Easter", "SuperBowl"],
            "event_type_1": [np.nan, "Sporting", np.nan, "Cultural", "Sporting"],
        })
        enc = event_encoders(cal)
        got = [event_features(row, enc) for _, row in cal.iterrows()]
        assert got == [(0, 0), (1, 1), (0, 0), (2, 2), (1, 1)]

    def test_encoder(self):
        enc = CategoryEncoder().fit(["b", "a", "b", "c"])
        assert list(enc.transform(["c", "a"])) == [2, 1]
        assert enc.categories_ == ["b", "a", "c"]


class TestMatrix:
    def test_forty_day_fixture_exact(self):
        long_sales, cal, prices = forty_day_fixture()
        fm = build_feature_matrix(long_sales, cal, prices)
        oracle = hand_table(long_sales, cal, prices)
        assert len(fm) == 40
        for col in oracle.columns:
            np.testing.assert_array_equal(fm[col].to_numpy(float), oracle[col].to_numpy(float), err_msg=col)

    def test_fixture_spot_values(self):
        # a few literal values written out by hand
        long_sales, cal, prices = forty_day_fixture()
        fm = build_feature_matrix(long_sales, cal, prices).set_index("day")
        assert list(long_sales["unit_sales"][:8]) == [2, 4, 1, 3, 0, 2, 4, 1]
        assert fm.loc[8, "lag_7"] == 2
        assert fm.loc[14, "rmean_7_7"] == pytest.approx(16 / 7)
        assert np.isnan(fm.loc[13, "rmean_7_7"])
        assert np.isnan(fm.loc[40, "rmean_28_28"])
        assert fm.loc[9, "event_name"] == 1 and fm.loc[31, "event_name"] == 1 and fm.loc[21, "event_name"] == 2
        assert np.isnan(fm.loc[1, "sell_price"]) and fm.loc[40, "sell_price"] == 2.25
        assert (fm.loc[11, "week"], fm.loc[11, "quarter"], fm.loc[11, "mday"]) == (10, 1, 8)

    def test_row_count_and_columns(self):
        sales, cal, prices = make_dataset(n_per_category=1, n_days=60, categories=("FOODS", "HOBBIES"))
        fm = build_feature_matrix(melt_wide_to_long(sales), cal.mask(cal == ""), prices)
        assert len(fm) == 120
        assert TABLE_ONE <= set(fm.columns)
        assert list(fm.columns) == FEATURE_MATRIX_COLUMNS

    def test_shift_property(self):
        sales, cal, prices = make_dataset(n_per_category=2, n_days=80)
        fm = build_feature_matrix(melt_wide_to_long(sales), cal, prices)
        for _, g in fm.groupby("series_id", sort=False):
            for k in (7, 28):
                shifted = g["target"].to_numpy()[:-k]
                np.testing.assert_array_equal(g[f"lag_{k}"].to_numpy()[k:], shifted)

    def test_rmean_1000_probes(self):
        sales, cal, prices = make_dataset(n_per_category=4, n_days=100, seed=3)
        fm = build_feature_matrix(melt_wide_to_long(sales), cal, prices)
        Y = sales.iloc[:, 6:].to_numpy(float)
        r = np.random.default_rng(4)
        for _ in range(1000):
            i, t = int(r.integers(0, Y.shape[0])), int(r.integers(0, 100))
            k, w = int(r.choice([7, 28])), int(r.choice([7, 28]))
            got = fm[f"rmean_{w}_{k}"].iloc[i * 100 + t]
            expected = brute_rmean(Y[i], t, w, k)
            if np.isnan(expected):
                assert np.isnan(got)
            else:
                assert got == pytest.approx(expected, rel=1e-12)

    def test_deterministic_bytes(self, tmp_path):
        sales, cal, prices = make_dataset(n_per_category=2, n_days=60)
        digests = []
        for run in range(2):
            path = tmp_path / f"fm{run}.csv"
            write_feature_matrix(build_feature_matrix(melt_wide_to_long(sales), cal, prices), path)
            digests.append(hashlib.sha256(path.read_bytes()).hexdigest())
        assert digests[0] == digests[1]
        back = read_feature_matrix(tmp_path / "fm0.csv")
        assert list(back.columns) == FEATURE_MATRIX_COLUMNS

    def test_day_absent_from_calendar(self):
        sales, cal, prices = make_dataset(n_per_category=1, n_days=60)
        with pytest.raises(DataIntegrityError, match="d_60"):
            build_feature_matrix(melt_wide_to_long(sales), cal.iloc[:59], prices)
