"""Boosting loop, model container, prediction and persistence."""

import json
import logging
from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from ..exceptions import InvalidArgumentError
from .binning import BinMapper
from .bundling import BundledStore
from .objectives import base_score, grad_hess, inverse_link, training_loss
from .params import LAMBDA, POISSON_LEAF_CAP, GbdtParams
from .sampling import goss_sample
from .tree import HistogramSource, Tree, grow_tree_leafwise

logger = logging.getLogger(__name__)

MODEL_FORMAT = "retailcast-gbdt"
MODEL_VERSION = 1


@dataclass
class GbdtModel:
    """Trained boosted ensemble.

    Scores are ``base_score + Σ tree outputs``; predictions apply the inverse
    link (``exp`` for poisson). ``history`` holds the per-round training RMSE
    in prediction space and the training loss, with entry 0 describing the
    constant model before the first tree.
    """

    base_score: float
    trees: list
    objective: str
    feature_names: list
    bin_mapper: BinMapper
    params: GbdtParams
    history: dict = field(default_factory=dict)

    @property
    def bin_boundaries(self):
        return {
            name: t
            for name, t, cat in zip(self.feature_names, self.bin_mapper.thresholds, self.bin_mapper.is_categorical)
            if not cat
        }

    @property
    def categorical_features(self):
        return [n for n, c in zip(self.feature_names, self.bin_mapper.is_categorical) if c]

    def raw_score(self, X):
        binned = self.bin_mapper.transform(_feature_array(X, self.feature_names))
        score = np.full(binned.shape[0], self.base_score)
        n_bins = self.bin_mapper.n_bins
        for tree in self.trees:
            tree.predict_binned(binned, n_bins, out=score)
        return score

    def predict(self, X):
        return inverse_link(self.objective, self.raw_score(X))

    def to_dict(self):
        return {
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "objective": self.objective,
            "base_score": self.base_score,
            "feature_names": list(self.feature_names),
            "bins": self.bin_mapper.to_dict(),
            "params": self.params.to_dict(),
            "trees": [t.to_dict() for t in self.trees],
            "history": {k: list(v) for k, v in self.history.items()},
        }

    def to_json(self):
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d):
        if d.get("format") != MODEL_FORMAT:
            raise InvalidArgumentError("not a serialized gbdt model")
        if d.get("version") != MODEL_VERSION:
            raise InvalidArgumentError(f"unsupported model version {d.get('version')!r}")
        return cls(
            base_score=float(d["base_score"]),
            trees=[Tree.from_dict(t) for t in d["trees"]],
            objective=d["objective"],
            feature_names=list(d["feature_names"]),
            bin_mapper=BinMapper.from_dict(d["bins"]),
            params=GbdtParams(**d["params"]),
            history={k: list(v) for k, v in d.get("history", {}).items()},
        )

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    def save(self, path):
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(self.to_json())

    @classmethod
    def load(cls, path):
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(fh.read())


def _feature_array(X, feature_names=None):
    """2-D float array in ``feature_names`` order; DataFrames are matched by column name."""
    if hasattr(X, "columns"):
        if feature_names is not None:
            missing = [c for c in feature_names if c not in X.columns]
            if missing:
                raise InvalidArgumentError(f"rows lack model features: {missing}")
            X = X[list(feature_names)]
        return X.to_numpy(dtype=np.float64, na_value=np.nan)
    arr = np.asarray(X, dtype=np.float64)
    if arr.ndim != 2:
        raise InvalidArgumentError(f"X must be 2-D, got shape {arr.shape}")
    if feature_names is not None and arr.shape[1] != len(feature_names):
        raise InvalidArgumentError(f"expected {len(feature_names)} feature columns, got {arr.shape[1]}")
    return arr


def _resolve_categorical(categorical_features, feature_names):
    mask = np.zeros(len(feature_names), dtype=bool)
    for c in categorical_features or ():
        if isinstance(c, (int, np.integer)) and not isinstance(c, bool):
            if not 0 <= c < len(feature_names):
                raise InvalidArgumentError(f"categorical feature index {c} out of range")
            mask[c] = True
        elif c in feature_names:
            mask[feature_names.index(c)] = True
        else:
            raise InvalidArgumentError(f"unknown categorical feature {c!r}")
    return mask


def _rmse(y, pred):
    return float(np.sqrt(np.mean((y - pred) ** 2)))


def train(X, y, params=None, categorical_features=None, feature_names=None, callback=None):
    """Fit a boosted tree ensemble.

    Parameters
    ----------
    X : array-like or DataFrame of shape (n_rows, n_features)
        Feature matrix; NaN marks a missing value.
    y : array-like of shape (n_rows,)
        Targets (non-negative for the poisson objective).
    params : GbdtParams, optional
    categorical_features : sequence of str or int, optional
        Columns holding non-negative integer category ids.
    feature_names : sequence of str, optional
        Defaults to DataFrame columns or ``f0, f1, ...``.
    callback : callable, optional
        Called as ``callback(round, model)`` after each round.

    Returns
    -------
    GbdtModel
    """
    params = params or GbdtParams()
    if feature_names is None:
        feature_names = [str(c) for c in X.columns] if hasattr(X, "columns") else None
    Xa = _feature_array(X)
    if feature_names is None:
        feature_names = [f"f{j}" for j in range(Xa.shape[1])]
    feature_names = list(feature_names)
    if len(feature_names) != Xa.shape[1]:
        raise InvalidArgumentError("feature_names length does not match the number of columns")
    y = np.asarray(y, dtype=np.float64).ravel()
    if Xa.shape[0] == 0:
        raise InvalidArgumentError("cannot train on empty data")
    if y.shape[0] != Xa.shape[0]:
        raise InvalidArgumentError(f"X has {Xa.shape[0]} rows but y has {y.shape[0]}")
    if not np.all(np.isfinite(y)):
        raise InvalidArgumentError("targets must be finite")
    if params.objective == "poisson" and np.any(y < 0):
        raise InvalidArgumentError("poisson targets must be non-negative")
    if np.any(np.isinf(Xa)):
        raise InvalidArgumentError("features must be finite or NaN")

    is_cat = _resolve_categorical(categorical_features, feature_names)
    mapper = BinMapper.fit(Xa, is_cat, params.max_bins)
    binned = mapper.transform(Xa)
    del Xa
    n_bins = mapper.n_bins
    offsets = mapper.offsets
    n = binned.shape[0]

    source = HistogramSource(binned, offsets)
    if params.enable_bundle:
        has_missing = np.array([np.any(binned[:, f] == n_bins[f]) for f in range(len(n_bins))])
        eligible = (~is_cat) & (~has_missing) & (n_bins > 1)
        if eligible.sum() > 1:
            store = BundledStore(binned, n_bins, mapper.default_bins(), eligible, params.efb_max_conflict)
            if store.bundles:
                logger.info("feature bundling merged %d features into %d bundles", store.n_bundled, len(store.bundles))
                source = HistogramSource(binned, offsets, store)

    base = base_score(params.objective, y)
    score = np.full(n, base)
    history = {
        "rmse": [_rmse(y, inverse_link(params.objective, score))],
        "loss": [training_loss(params.objective, score, y)],
    }
    model = GbdtModel(base, [], params.objective, feature_names, mapper, params, history)
    rng = np.random.default_rng(params.seed)
    cap = POISSON_LEAF_CAP if params.objective == "poisson" else None
    all_rows = np.arange(n, dtype=np.int64)
    rows, weights = all_rows, None

    for it in range(params.num_iterations):
        g, h = grad_hess(params.objective, score, y)
        if params.use_goss:
            if it % params.bagging_frequency == 0:
                rows, weights = goss_sample(g, params.goss_a, params.goss_b, rng)
            gw = np.zeros(n)
            hw = np.zeros(n)
            gw[rows] = g[rows] * weights
            hw[rows] = h[rows] * weights
        else:
            gw, hw = g, h
        tree = grow_tree_leafwise(
            binned,
            gw,
            hw,
            n_bins,
            is_cat,
            max_leaves=params.max_leaves,
            min_data_in_leaf=params.min_data_in_leaf,
            rows=rows,
            source=source,
            lam=LAMBDA,
        )
        tree.scale(params.learning_rate, cap)
        tree.predict_binned(binned, n_bins, out=score)
        model.trees.append(tree)
        history["rmse"].append(_rmse(y, inverse_link(params.objective, score)))
        history["loss"].append(training_loss(params.objective, score, y))
        if callback is not None:
            callback(it, model)
    return model


def predict(model, X):
    """Predictions in target space; missing values follow each node's learned direction."""
    return model.predict(X)


def feature_importance(model):
    """Number of internal nodes using each feature, summed over all trees."""
    counts = Counter()
    for tree in model.trees:
        for f in tree.feature[tree.feature >= 0]:
            counts[int(f)] += 1
    return {name: counts.get(j, 0) for j, name in enumerate(model.feature_names)}
