import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin

from .._validation import check_is_fitted
from .boosting import feature_importance, train
from .params import GbdtParams


class GBDTRegressor(RegressorMixin, BaseEstimator):
    """Histogram gradient-boosted trees with a scikit-learn interface.

    Parameters mirror :class:`GbdtParams`. ``categorical_features`` names
    (or indexes) columns holding integer category ids.

    Examples
    --------
    >>> import numpy as np
    >>> rng = np.random.default_rng(0)
    >>> X = rng.normal(size=(200, 3))
    >>> y = rng.poisson(np.exp(X[:, 0]))
    >>> est = GBDTRegressor(learning_rate=0.1, num_iterations=20).fit(X, y)
    >>> bool(np.all(est.predict(X) > 0))
    True
    """

    def __init__(
        self,
        objective="poisson",
        learning_rate=0.001,
        num_iterations=1000,
        bagging_frequency=1,
        min_data_in_leaf=5,
        max_leaves=31,
        max_bins=255,
        goss_a=0.2,
        goss_b=0.1,
        efb_max_conflict=0,
        enable_bundle=True,
        seed=0,
        categorical_features=None,
    ):
        self.objective = objective
        self.learning_rate = learning_rate
        self.num_iterations = num_iterations
        self.bagging_frequency = bagging_frequency
        self.min_data_in_leaf = min_data_in_leaf
        self.max_leaves = max_leaves
        self.max_bins = max_bins
        self.goss_a = goss_a
        self.goss_b = goss_b
        self.efb_max_conflict = efb_max_conflict
        self.enable_bundle = enable_bundle
        self.seed = seed
        self.categorical_features = categorical_features

    def _params(self):
        return GbdtParams(
            objective=self.objective,
            learning_rate=self.learning_rate,
            num_iterations=self.num_iterations,
            bagging_frequency=self.bagging_frequency,
            min_data_in_leaf=self.min_data_in_leaf,
            max_leaves=self.max_leaves,
            max_bins=self.max_bins,
            goss_a=self.goss_a,
            goss_b=self.goss_b,
            efb_max_conflict=self.efb_max_conflict,
            enable_bundle=self.enable_bundle,
            seed=self.seed,
        )

    def fit(self, X, y):
        self.model_ = train(X, y, self._params(), categorical_features=self.categorical_features)
        self.n_features_in_ = len(self.model_.feature_names)
        if hasattr(X, "columns"):
            self.feature_names_in_ = np.asarray(self.model_.feature_names, dtype=object)
        return self

    def predict(self, X):
        check_is_fitted(self, "model_")
        return self.model_.predict(X)

    @property
    def feature_importances_(self):
        check_is_fitted(self, "model_")
        imp = feature_importance(self.model_)
        return np.array([imp[name] for name in self.model_.feature_names], dtype=np.int64)
