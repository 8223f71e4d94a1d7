import json
import os

import numpy as np
import pandas as pd
import pytest

from retailcast.bench import cli
from retailcast.bench.config import BenchmarkConfig, load_config
from retailcast.bench.eda import eda_event_price_stats, eda_sales_summaries
from retailcast.bench.runner import (
    RetailData,
    export_forecasts,
    gbdt_forecasts,
    read_forecasts,
    rmse_table,
    run_benchmark,
    run_single_product,
)
from retailcast.bench.synthetic import make_dataset, write_dataset
from retailcast.exceptions import InvalidArgumentError, NotFoundError
from retailcast.gbdt import GbdtParams
from retailcast.ingest import melt_wide_to_long, merge_all

FAST_GBDT = dict(learning_rate=0.1, num_iterations=20)


def dataset(**kw):
    sales, cal, prices = make_dataset(**kw)
    cal = cal.mask(cal == "")
    cal["day"] = np.arange(1, len(cal) + 1)
    return RetailData(sales, cal, prices)


def merged_of(data):
    return merge_all(melt_wide_to_long(data.sales), data.calendar, data.prices)


class TestEda:
    def test_all_discounted(self):
        data = dataset(n_per_category=2, n_days=60, categories=("FOODS",))
        merged = merged_of(data)
        ev = merged["event_name_1"].notna()
        merged.loc[ev, "sell_price"] = merged.loc[ev, "sell_price"] - 5.0
        assert eda_event_price_stats(merged).fraction_discounted == 1.0

    def test_no_events(self):
        sales, cal, prices = make_dataset(n_per_category=1, n_days=30)
        cal = make_dataset(n_per_category=1, n_days=30)[1]
        cal["event_name_1"] = np.nan
        cal["day"] = np.arange(1, 31)
        stats = eda_event_price_stats(merge_all(melt_wide_to_long(sales), cal, prices))
        assert stats.empty
        assert stats.to_dict()["fraction_discounted"] is None

    def test_ten_products_brute_force(self):
        data = dataset(n_per_category=10, n_days=120, categories=("HOBBIES",), seed=4)
        merged = merged_of(data)
        r = np.random.default_rng(0)
        merged["sell_price"] = merged["sell_price"] * r.choice([0.8, 1.0, 1.3], len(merged))
        stats = eda_event_price_stats(merged)
        down = up = 0
        for pid in data.sales["id"]:
            rows = merged[merged["id"] == pid]
            is_ev = rows["event_name_1"].notna()
            e, n = rows.loc[is_ev, "sell_price"].mean(), rows.loc[~is_ev, "sell_price"].mean()
            down += e < n
            up += e > n
        assert stats.fraction_discounted == down / 10
        assert stats.fraction_increased == up / 10
        assert sum(stats.discounts_by_department.values()) == down

    def test_summaries(self):
        data = dataset(n_per_category=1, n_days=40, categories=("FOODS",))
        out = eda_sales_summaries(merged_of(data))
        assert out["units_by_category"]["share"].tolist() == [1.0]
        total = data.sales.iloc[:, 6:].to_numpy().sum()
        assert out["units_by_weekday"]["units"].sum() == total
        assert {"cat_id", "mean", "std"} <= set(out["price_over_time"].columns)

    def test_category_sums_500_rows(self):
        data = dataset(n_per_category=5, n_days=34, seed=6)
        merged = merged_of(data).iloc[:500]
        got = eda_sales_summaries(merged)["units_by_category"].set_index("cat_id")["units"]
        expected = {}
        for cat, units in zip(merged["cat_id"].astype(str), merged["unit_sales"]):
            expected[cat] = expected.get(cat, 0) + units
        assert got.to_dict() == expected


class TestSingle:
    @pytest.mark.filterwarnings("ignore:constant training series")
    def test_constant_product_all_models(self):
        data = dataset(n_per_category=1, n_days=120, constant=3)
        pid = data.sales["id"].iloc[0]
        for model in ("arima", "additive", "gbdt"):
            res = run_single_product(data, model, pid, gbdt_params=GbdtParams(**FAST_GBDT))
            assert res.rmse < 0.05, model
            assert len(res.forecast) == 28

    def test_dotted_id_and_unknown(self):
        data = dataset(n_per_category=1, n_days=90)
        res = run_single_product(data, "arima", "HOBBIES.1.001.CA.1", arima_order=(1, 1, 1))
        assert res.product_id == "HOBBIES_1_001_CA_1_validation"
        assert res.payload["order"] == [1, 1, 1]
        with pytest.raises(NotFoundError):
            run_single_product(data, "arima", "NOPE_1")

    def test_too_short(self):
        data = dataset(n_per_category=1, n_days=50)
        with pytest.raises(InvalidArgumentError):
            run_single_product(data, "arima", data.sales["id"].iloc[0])


class TestLeakage:
    def test_tail_never_reaches_any_model(self):
        data = dataset(n_per_category=2, n_days=110, seed=8)
        tampered = RetailData(data.sales.copy(), data.calendar, data.prices)
        tail = [f"d_{d}" for d in range(83, 111)]
        tampered.sales[tail] = 10_000
        ids = data.select_products(["FOODS", "HOBBIES", "HOUSEHOLD"], 2)
        params = GbdtParams(**FAST_GBDT)
        a, _ = gbdt_forecasts(data, ids, 28, params)
        b, _ = gbdt_forecasts(tampered, ids, 28, params)
        for sid in ids:
            np.testing.assert_array_equal(a[sid], b[sid])
        for model in ("arima", "additive"):
            x = run_single_product(data, model, ids[0], arima_order=(1, 1, 0))
            y = run_single_product(tampered, model, ids[0], arima_order=(1, 1, 0))
            np.testing.assert_array_equal(x.forecast.mean, y.forecast.mean)
            assert y.rmse > x.rmse

    def test_training_rows_end_before_tail(self, monkeypatch):
        import retailcast.bench.runner as runner

        seen = {}
        real_train = runner.train

        def spy(X, y, *args, **kwargs):
            seen["X"], seen["y"] = X, y
            return real_train(X, y, *args, **kwargs)

        monkeypatch.setattr(runner, "train", spy)
        data = dataset(n_per_category=1, n_days=100, seed=9)
        gbdt_forecasts(data, list(data.sales["id"]), 28, GbdtParams(**FAST_GBDT))
        assert len(seen["y"]) == 3 * 72
        assert np.all(np.isfinite(seen["y"]))


@pytest.fixture(scope="module")
def result(tmp_path_factory):
    out = tmp_path_factory.mktemp("bench")
    cfg = BenchmarkConfig(output_dir=str(out), n_per_category=1, arima_max_order=(1, 1, 1),
                          gbdt_params=FAST_GBDT)
    data = dataset(n_per_category=2, n_days=120, seed=10)
    return run_benchmark(cfg, data), out, cfg, data


class TestBenchmark:
    def test_shape(self, result):
        res, _, _, _ = result
        assert list(res.rmse_table["model"]) == ["arima", "additive", "gbdt"]
        assert {"FOODS", "HOBBIES", "HOUSEHOLD", "Total"} <= set(res.rmse_table.columns)

    def test_total_recomputed_from_csv(self, result):
        res, out, _, _ = result
        detail = pd.read_csv(out / "detail.csv", keep_default_na=False, na_values=[""])
        table = pd.read_csv(out / "rmse_table.csv").set_index("model")
        for model, group in detail.groupby("model"):
            scored = group[group["error"].isna() | (group["error"] == "")]
            assert table.loc[model, "Total"] == pytest.approx(scored["rmse"].astype(float).mean(), rel=1e-12)

    def test_deterministic(self, result, tmp_path):
        res, _, cfg, data = result
        cfg2 = BenchmarkConfig(**{**cfg.to_dict(), "output_dir": str(tmp_path)})
        again = run_benchmark(cfg2, data)
        pd.testing.assert_frame_equal(again.rmse_table, res.rmse_table)

    def test_failures_excluded(self):
        detail = pd.DataFrame({
            "product_id": ["a", "b", "c"], "cat_id": ["X", "X", "Y"], "model": ["arima"] * 3,
            "rmse": [1.0, np.nan, 3.0], "error": ["", "boom", ""],
        })
        table = rmse_table(detail, ["X", "Y"], ["arima"]).iloc[0]
        assert table["Total"] == 2.0 and table["n_failed"] == 1 and table["X"] == 1.0

    def test_export_round_trip(self, result, tmp_path):
        res, _, _, _ = result
        path = tmp_path / "sub.csv"
        frame = export_forecasts(res.forecasts["arima"], path)
        assert frame.shape == (3, 29)
        back = read_forecasts(path)
        for sid, values in res.forecasts["arima"].items():
            np.testing.assert_array_equal(back[sid], values)

    def test_export_clamps(self, tmp_path):
        frame = export_forecasts({"a": np.array([-1.0, 2.0])}, tmp_path / "x.csv")
        assert (frame[["F1", "F2"]].to_numpy() >= 0).all()
        with pytest.raises(InvalidArgumentError):
            export_forecasts({"a": [1.0], "b": [1.0, 2.0]}, tmp_path / "y.csv")


class TestConfig:
    def test_load(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"horizon": 14, "models": ["arima"]}))
        cfg = load_config(path)
        assert cfg.horizon == 14 and cfg.models == ("arima",)

    @pytest.mark.parametrize("doc", [{"horizn": 3}, {"models": ["prophet"]}, {"horizon": 0}, [1]])
    def test_rejects(self, tmp_path, doc):
        path = tmp_path / "c.json"
        path.write_text(json.dumps(doc))
        with pytest.raises(InvalidArgumentError):
            load_config(path)


@pytest.fixture(scope="module")
def data_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("m5")
    write_dataset(d, n_per_category=1, n_days=100, seed=11)
    return str(d)


class TestCli:
    def test_ingest_and_eda(self, data_dir, tmp_path, capsys):
        assert cli.main(["ingest", "--data-dir", data_dir, "--out", str(tmp_path / "m.csv")]) == 0
        assert len(pd.read_csv(tmp_path / "m.csv")) == 300
        assert cli.main(["eda", "--data-dir", data_dir, "--out-dir", str(tmp_path / "eda")]) == 0
        assert os.path.exists(tmp_path / "eda" / "event_price_stats.json")

    def test_single(self, data_dir, tmp_path, capsys):
        code = cli.main(["single", "--data-dir", data_dir, "--model", "arima", "--product", "FOODS_1_001_CA_1",
                         "--order", "1", "1", "0", "--out-dir", str(tmp_path)])
        assert code == 0
        assert "rmse=" in capsys.readouterr().out
        assert json.loads((tmp_path / "payload.json").read_text())["order"] == [1, 1, 0]

    def test_benchmark_and_export(self, data_dir, tmp_path):
        cfg = {
            "calendar_path": os.path.join(data_dir, "calendar.csv"),
            "sales_path": os.path.join(data_dir, "sales_train_validation.csv"),
            "prices_path": os.path.join(data_dir, "sell_prices.csv"),
            "n_per_category": 1, "models": ["arima"], "arima_max_order": [1, 1, 1],
        }
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(cfg))
        assert cli.main(["benchmark", "--config", str(path), "--output-dir", str(tmp_path / "o")]) == 0
        code = cli.main(["export", "--forecasts", str(tmp_path / "o" / "forecasts.json"), "--model", "arima",
                         "--out", str(tmp_path / "sub.csv")])
        assert code == 0
        assert pd.read_csv(tmp_path / "sub.csv").shape == (3, 29)

    def test_exit_codes(self, data_dir, tmp_path):
        assert cli.main([]) == 1
        assert cli.main(["single", "--data-dir", data_dir, "--model", "xgb", "--product", "x"]) == 1
        assert cli.main(["single", "--data-dir", data_dir, "--model", "arima", "--product", "NOPE"]) == 2
        assert cli.main(["benchmark", "--config", str(tmp_path / "missing.json")]) == 1
        bad = tmp_path / "bad"
        bad.mkdir()
        (bad / "calendar.csv").write_text("date,d\n")
        (bad / "sales_train_validation.csv").write_text("id\n")
        (bad / "sell_prices.csv").write_text("x\n")
        assert cli.main(["ingest", "--data-dir", str(bad)]) == 2
        const = tmp_path / "const"
        write_dataset(const, n_per_category=1, n_days=100, constant=0)
        assert cli.main(["single", "--data-dir", str(const), "--model", "arima", "--product", "FOODS_1_001",
                         "--order", "0", "0", "0"]) == 0
