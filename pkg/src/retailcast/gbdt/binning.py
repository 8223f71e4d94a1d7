"""Feature quantization and gradient histograms.

Every feature ``f`` is mapped to integer bins ``0 .. n_bins[f] - 1`` plus one
extra bin ``n_bins[f]`` that holds missing values (and, for categorical
features, categories never seen during fitting). Histograms for all features
of a node live in one flat ``(total_bins, 3)`` array of (Σgrad, Σhess, count)
with per-feature offsets, so a single numba kernel fills all of them.
"""

import logging
from dataclasses import dataclass

import numba
import numpy as np

from .._validation import check_positive_int
from ..exceptions import InvalidArgumentError

logger = logging.getLogger(__name__)

MAX_CATEGORIES = 65534


def _numeric_thresholds(col, max_bins):
    """Upper bin edges so that ``bin(x) = searchsorted(edges, x, 'left')``.

    With at most ``max_bins`` distinct values every value gets its own bin
    (edges at midpoints); otherwise edges are equal-frequency quantiles.
    """
    vals = col[~np.isnan(col)]
    if vals.size == 0:
        return np.empty(0)
    distinct = np.unique(vals)
    if distinct.size <= max_bins:
        return (distinct[:-1] + distinct[1:]) / 2.0
    qs = np.linspace(0.0, 100.0, max_bins + 1)[1:-1]
    edges = np.unique(np.percentile(vals, qs, method="midpoint"))
    # an edge equal to the maximum would leave an empty top bin
    return edges[edges < distinct[-1]]


@dataclass
class BinMapper:
    """Per-feature bin edges (numeric) or category tables (categorical)."""

    thresholds: list
    categories: list
    is_categorical: np.ndarray

    @property
    def n_features(self):
        return len(self.is_categorical)

    @property
    def n_bins(self):
        """Non-missing bins per feature; the missing bin index equals this value."""
        out = np.empty(self.n_features, dtype=np.int64)
        for f in range(self.n_features):
            if self.is_categorical[f]:
                out[f] = len(self.categories[f])
            else:
                out[f] = len(self.thresholds[f]) + 1
        return out

    @property
    def offsets(self):
        """Start of each feature's slice in the flat histogram (slice length n_bins + 1)."""
        sizes = self.n_bins + 1
        return np.concatenate([[0], np.cumsum(sizes)]).astype(np.int64)

    @classmethod
    def fit(cls, X, is_categorical=None, max_bins=255):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2:
            raise InvalidArgumentError(f"X must be 2-D, got shape {X.shape}")
        check_positive_int(max_bins, "max_bins", minimum=2)
        n_features = X.shape[1]
        if is_categorical is None:
            is_categorical = np.zeros(n_features, dtype=bool)
        is_categorical = np.asarray(is_categorical, dtype=bool)
        if is_categorical.shape != (n_features,):
            raise InvalidArgumentError("is_categorical must have one flag per feature")
        thresholds, categories = [], []
        for f in range(n_features):
            col = X[:, f]
            if is_categorical[f]:
                vals = col[~np.isnan(col)]
                if np.any(vals != np.round(vals)) or np.any(vals < 0):
                    raise InvalidArgumentError(
                        f"categorical feature {f} must hold non-negative integer ids"
                    )
                cats = np.unique(vals)
                if cats.size > MAX_CATEGORIES:
                    raise InvalidArgumentError(
                        f"categorical feature {f} has {cats.size} categories, max {MAX_CATEGORIES}"
                    )
                categories.append(cats)
                thresholds.append(np.empty(0))
            else:
                thresholds.append(_numeric_thresholds(col, max_bins))
                categories.append(np.empty(0))
        return cls(thresholds, categories, is_categorical)

    def transform_column(self, col, f):
        col = np.asarray(col, dtype=np.float64)
        missing = np.isnan(col)
        if self.is_categorical[f]:
            cats = self.categories[f]
            pos = np.searchsorted(cats, col)
            pos_c = np.minimum(pos, max(len(cats) - 1, 0))
            known = (~missing) & (len(cats) > 0)
            if len(cats):
                known &= cats[pos_c] == col
            unknown = (~missing) & (~known)
            if np.any(unknown):
                logger.info(
                    "feature %d: %d rows with unseen categories routed as missing",
                    f,
                    int(unknown.sum()),
                )
            out = np.where(known, pos_c, len(cats))
        else:
            out = np.searchsorted(self.thresholds[f], col, side="left")
            out[missing] = len(self.thresholds[f]) + 1
        return out.astype(np.uint16)

    def transform(self, X):
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise InvalidArgumentError(
                f"expected {self.n_features} feature columns, got shape {X.shape}"
            )
        out = np.empty(X.shape, dtype=np.uint16, order="F")
        for f in range(self.n_features):
            out[:, f] = self.transform_column(X[:, f], f)
        return out

    def default_bins(self):
        """Bin that the value 0 falls in (used by feature bundling); -1 for categoricals."""
        out = np.full(self.n_features, -1, dtype=np.int64)
        for f in range(self.n_features):
            if not self.is_categorical[f]:
                out[f] = int(np.searchsorted(self.thresholds[f], 0.0, side="left"))
        return out

    def to_dict(self):
        return {
            "thresholds": [t.tolist() for t in self.thresholds],
            "categories": [c.tolist() for c in self.categories],
            "is_categorical": self.is_categorical.tolist(),
        }

    @classmethod
    def from_dict(cls, d):
        return cls(
            [np.asarray(t, dtype=np.float64) for t in d["thresholds"]],
            [np.asarray(c, dtype=np.float64) for c in d["categories"]],
            np.asarray(d["is_categorical"], dtype=bool),
        )


@numba.njit(parallel=True, cache=True)
def _fill_histograms(binned, rows, grad, hess, offsets, out):
    # one feature per parallel task; each writes a disjoint slice of `out` and
    # accumulates rows in index order, so results do not depend on scheduling
    n_cols = binned.shape[1]
    for f in numba.prange(n_cols):
        off = offsets[f]
        for i in range(rows.shape[0]):
            r = rows[i]
            b = off + binned[r, f]
            out[b, 0] += grad[r]
            out[b, 1] += hess[r]
            out[b, 2] += 1.0


def fill_histograms(binned, rows, grad, hess, offsets):
    out = np.zeros((int(offsets[-1]), 3))
    _fill_histograms(binned, rows, grad, hess, offsets, out)
    return out


@dataclass
class Histogram:
    """Per-bin sums of one feature; the last entry is the missing bin."""

    grad: np.ndarray
    hess: np.ndarray
    count: np.ndarray
    thresholds: np.ndarray

    @property
    def n_occupied(self):
        return int(np.count_nonzero(self.count))


def build_histograms(column, gradients, hessians, max_bins=255):
    """Quantize one numeric feature column and accumulate gradient statistics."""
    column = np.asarray(column, dtype=np.float64).reshape(-1, 1)
    grad = np.ascontiguousarray(gradients, dtype=np.float64)
    hess = np.ascontiguousarray(hessians, dtype=np.float64)
    if not (len(grad) == len(hess) == column.shape[0]):
        raise InvalidArgumentError("column, gradients and hessians must have equal length")
    mapper = BinMapper.fit(column, max_bins=max_bins)
    binned = mapper.transform(column)
    rows = np.arange(column.shape[0], dtype=np.int64)
    h = fill_histograms(binned, rows, grad, hess, mapper.offsets)
    return Histogram(h[:, 0], h[:, 1], h[:, 2].astype(np.int64), mapper.thresholds[0])
