"""Command-line entry point ``retailcast``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 model failure.
"""

import argparse
import json
import logging
import os
import sys

import numpy as np

from ..exceptions import (
    ConvergenceError,
    DataIntegrityError,
    DegenerateInputError,
    DomainError,
    GridSearchError,
    InvalidArgumentError,
    NotFoundError,
)
from ..ingest import melt_wide_to_long, merge_all, write_long_csv
from .config import load_config
from .eda import eda_event_price_stats, eda_sales_summaries
from .runner import RetailData, export_forecasts, run_benchmark, run_single_product

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_MODEL = 0, 1, 2, 3

logger = logging.getLogger("retailcast")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _load(args):
    if args.data_dir:
        return RetailData.from_dir(args.data_dir)
    if not (args.calendar and args.sales):
        raise InvalidArgumentError("give --data-dir or both --calendar and --sales")
    return RetailData.load(args.calendar, args.sales, args.prices)


def _merged(data, products=None):
    sales = data.sales if products is None else data.sales.head(products)
    return merge_all(melt_wide_to_long(sales), data.calendar, data.prices)


def cmd_ingest(args):
    data = _load(args)
    merged = _merged(data, args.products)
    if args.out:
        cols = list(merged.columns)
        merged[cols].to_csv(args.out, index=False, lineterminator="\n")
    if args.long_out:
        write_long_csv(melt_wide_to_long(data.sales if args.products is None else data.sales.head(args.products)), args.long_out)
    print(f"series={len(data.sales)} days={data.n_days} merged_rows={len(merged)}")
    return EXIT_OK


def cmd_eda(args):
    data = _load(args)
    merged = _merged(data, args.products)
    os.makedirs(args.out_dir, exist_ok=True)
    stats = eda_event_price_stats(merged)
    with open(os.path.join(args.out_dir, "event_price_stats.json"), "w", encoding="utf-8") as fh:
        json.dump(stats.to_dict(), fh, indent=2)
    for name, table in eda_sales_summaries(merged).items():
        table.to_csv(os.path.join(args.out_dir, f"{name}.csv"), index=False, lineterminator="\n")
    if stats.empty:
        print("no event days in data")
    else:
        print(f"discounted={stats.fraction_discounted:.4f} increased={stats.fraction_increased:.4f}")
    return EXIT_OK


def cmd_single(args):
    data = _load(args)
    order = tuple(args.order) if args.order else None
    res = run_single_product(data, args.model, args.product, args.horizon, clamp=not args.no_clamp, arima_order=order)
    print(f"{res.product_id} {res.model} rmse={res.rmse:.6f}")
    if args.out_dir:
        os.makedirs(args.out_dir, exist_ok=True)
        export_forecasts({res.product_id: res.forecast}, os.path.join(args.out_dir, "forecast.csv"), clamp=not args.no_clamp)
        payload = {"product_id": res.product_id, "model": res.model, "rmse": res.rmse,
                   "actual": np.asarray(res.actual).tolist(), "forecast": res.forecast.mean.tolist(), **res.payload}
        with open(os.path.join(args.out_dir, "payload.json"), "w", encoding="utf-8") as fh:
            json.dump(payload, fh)
    return EXIT_OK


def cmd_benchmark(args):
    config = load_config(args.config)
    if args.output_dir:
        config.output_dir = args.output_dir
    result = run_benchmark(config)
    print(result.rmse_table.to_csv(index=False, lineterminator="\n"), end="")
    return EXIT_OK


def cmd_export(args):
    try:
        with open(args.forecasts, encoding="utf-8") as fh:
            stored = json.load(fh)
    except FileNotFoundError as exc:
        raise InvalidArgumentError(f"forecast file {args.forecasts!r} not found") from exc
    except json.JSONDecodeError as exc:
        raise DataIntegrityError(f"{args.forecasts}: not valid JSON") from exc
    if args.model not in stored:
        raise NotFoundError(f"no forecasts for model {args.model!r} in {args.forecasts}")
    frame = export_forecasts(stored[args.model], args.out, clamp=not args.no_clamp)
    print(f"wrote {len(frame)} rows to {args.out}")
    return EXIT_OK


def build_parser():
    parser = _Parser(prog="retailcast", description="Retail sales forecasting benchmark.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def data_args(p):
        p.add_argument("--data-dir", help="directory holding the three M5 files")
        p.add_argument("--calendar")
        p.add_argument("--sales")
        p.add_argument("--prices")

    p = sub.add_parser("ingest", help="parse, reshape and merge the input files")
    data_args(p)
    p.add_argument("--products", type=int, help="only the first N series")
    p.add_argument("--out", help="merged long CSV")
    p.add_argument("--long-out", help="long sales CSV before merging")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("eda", help="event pricing and sales summaries")
    data_args(p)
    p.add_argument("--products", type=int)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_eda)

    p = sub.add_parser("single", help="fit one model on one product")
    data_args(p)
    p.add_argument("--model", choices=["arima", "additive", "gbdt"], required=True)
    p.add_argument("--product", required=True)
    p.add_argument("--horizon", type=int, default=28)
    p.add_argument("--order", type=int, nargs=3, metavar=("P", "D", "Q"), help="fixed ARIMA order (default: AIC grid)")
    p.add_argument("--no-clamp", action="store_true")
    p.add_argument("--out-dir")
    p.set_defaults(func=cmd_single)

    p = sub.add_parser("benchmark", help="per-category comparison from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--output-dir")
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("export", help="submission CSV from a benchmark's forecasts.json")
    p.add_argument("--forecasts", required=True)
    p.add_argument("--model", choices=["arima", "additive", "gbdt"], required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--no-clamp", action="store_true")
    p.set_defaults(func=cmd_export)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except InvalidArgumentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataIntegrityError, NotFoundError, OSError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (ConvergenceError, GridSearchError, DegenerateInputError, DomainError) as exc:
        print(f"model failure: {exc}", file=sys.stderr)
        return EXIT_MODEL


if __name__ == "__main__":
    sys.exit(main())
