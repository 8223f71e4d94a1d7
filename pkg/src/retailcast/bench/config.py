import json
from dataclasses import asdict, dataclass, field, fields

from .._validation import check_nonneg_int, check_positive_int
from ..exceptions import InvalidArgumentError

MODELS = ("arima", "additive", "gbdt")
DEFAULT_CATEGORIES = ("FOODS", "HOBBIES", "HOUSEHOLD")


@dataclass
class BenchmarkConfig:
    """Settings of a benchmark run; mirrors the JSON config document.

    ``gbdt_params`` overrides individual boosting parameters and
    ``arima_max_order`` bounds the (p, d, q) grid.
    """

    calendar_path: str = "calendar.csv"
    sales_path: str = "sales_train_validation.csv"
    prices_path: str = "sell_prices.csv"
    output_dir: str = "benchmark_output"
    horizon: int = 28
    n_per_category: int = 100
    categories: tuple = DEFAULT_CATEGORIES
    models: tuple = MODELS
    seed: int = 0
    clamp_negative: bool = True
    n_jobs: int = 1
    arima_max_order: tuple = (2, 2, 2)
    use_event_holidays: bool = True
    gbdt_params: dict = field(default_factory=dict)

    def __post_init__(self):
        check_positive_int(self.horizon, "horizon")
        check_positive_int(self.n_per_category, "n_per_category")
        check_positive_int(self.n_jobs, "n_jobs")
        self.categories = tuple(self.categories)
        self.models = tuple(self.models)
        if not self.categories:
            raise InvalidArgumentError("categories must not be empty")
        unknown = [m for m in self.models if m not in MODELS]
        if unknown or not self.models:
            raise InvalidArgumentError(f"models must be a non-empty subset of {MODELS}, got {self.models}")
        if not isinstance(self.seed, int) or isinstance(self.seed, bool):
            raise InvalidArgumentError(f"seed must be an integer, got {self.seed!r}")
        order = tuple(self.arima_max_order)
        if len(order) != 3:
            raise InvalidArgumentError("arima_max_order must have three entries")
        for v, name in zip(order, "pdq"):
            check_nonneg_int(v, f"arima_max_order.{name}")
        self.arima_max_order = order
        if not isinstance(self.gbdt_params, dict):
            raise InvalidArgumentError("gbdt_params must be a mapping")

    def to_dict(self):
        d = asdict(self)
        d["categories"] = list(self.categories)
        d["models"] = list(self.models)
        d["arima_max_order"] = list(self.arima_max_order)
        return d


def load_config(path):
    """Read a JSON config; unknown keys are rejected so typos surface early."""
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except FileNotFoundError as exc:
        raise InvalidArgumentError(f"config file {path!r} not found") from exc
    except json.JSONDecodeError as exc:
        raise InvalidArgumentError(f"config file {path!r} is not valid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise InvalidArgumentError("config document must be a JSON object")
    allowed = {f.name for f in fields(BenchmarkConfig)}
    unknown = sorted(set(raw) - allowed)
    if unknown:
        raise InvalidArgumentError(f"unknown config key(s): {unknown}")
    return BenchmarkConfig(**raw)
