from dataclasses import asdict, dataclass

from .._validation import (
    check_fraction,
    check_nonneg_int,
    check_positive_float,
    check_positive_int,
)
from ..exceptions import InvalidArgumentError

# L2 regularizer in the gain and leaf-value formulas
LAMBDA = 1e-3
# per-tree cap on score-space leaf values for the poisson objective
POISSON_LEAF_CAP = 10.0
MAX_NUMERIC_BINS = 255


@dataclass(frozen=True)
class GbdtParams:
    """Boosting hyper-parameters.

    Defaults follow the retail benchmark setup: poisson objective, learning
    rate 0.001, 1000 rounds, sampling every round, at least 5 rows per leaf.
    GOSS sampling runs whenever ``bagging_frequency > 0``; set it to 0 to
    train on every row each round.
    """

    objective: str = "poisson"
    metric: str = "rmse"
    learning_rate: float = 0.001
    num_iterations: int = 1000
    bagging_frequency: int = 1
    min_data_in_leaf: int = 5
    max_leaves: int = 31
    max_bins: int = 255
    goss_a: float = 0.2
    goss_b: float = 0.1
    efb_max_conflict: int = 0
    enable_bundle: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.objective not in ("poisson", "squared"):
            raise InvalidArgumentError(f"objective must be 'poisson' or 'squared', got {self.objective!r}")
        if self.metric != "rmse":
            raise InvalidArgumentError(f"only the 'rmse' metric is supported, got {self.metric!r}")
        lr = check_positive_float(self.learning_rate, "learning_rate")
        if lr > 1.0:
            raise InvalidArgumentError(f"learning_rate must be <= 1, got {lr}")
        check_nonneg_int(self.num_iterations, "num_iterations")
        check_nonneg_int(self.bagging_frequency, "bagging_frequency")
        check_positive_int(self.min_data_in_leaf, "min_data_in_leaf")
        check_positive_int(self.max_leaves, "max_leaves")
        check_positive_int(self.max_bins, "max_bins", minimum=2)
        if self.max_bins > MAX_NUMERIC_BINS:
            raise InvalidArgumentError(f"max_bins must be <= {MAX_NUMERIC_BINS}, got {self.max_bins}")
        a = check_fraction(self.goss_a, "goss_a")
        b = check_fraction(self.goss_b, "goss_b")
        if a + b > 1.0 + 1e-12:
            raise InvalidArgumentError(f"goss_a + goss_b must be <= 1, got {a + b}")
        check_nonneg_int(self.efb_max_conflict, "efb_max_conflict")

    @property
    def use_goss(self):
        return self.bagging_frequency > 0

    def to_dict(self):
        return asdict(self)
