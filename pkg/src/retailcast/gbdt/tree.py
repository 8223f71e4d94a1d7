"""Regression trees in flat-array form and the leaf-wise grower."""

import heapq
from dataclasses import dataclass

import numba
import numpy as np

from .binning import fill_histograms
from .params import LAMBDA
from .splitting import best_split


@dataclass
class Tree:
    """A fitted tree; node 0 is the root and leaves have ``feature == -1``.

    Categorical nodes send a bin left when ``cat_bits[cat_start[i] + bin]``
    is set; numeric nodes send ``bin <= threshold_bin`` left. The missing
    bin always follows ``missing_left``.
    """

    feature: np.ndarray
    threshold_bin: np.ndarray
    missing_left: np.ndarray
    cat_start: np.ndarray
    cat_bits: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    count: np.ndarray
    sum_grad: np.ndarray
    sum_hess: np.ndarray
    gain: np.ndarray

    @property
    def n_nodes(self):
        return int(self.feature.shape[0])

    @property
    def is_leaf(self):
        return self.feature < 0

    @property
    def n_leaves(self):
        return int(np.count_nonzero(self.is_leaf))

    @property
    def n_internal(self):
        return self.n_nodes - self.n_leaves

    def left_categories(self, node):
        """Category bins routed left at a categorical node (empty for numeric nodes)."""
        start = self.cat_start[node]
        if start < 0:
            return np.empty(0, dtype=np.int64)
        # masks are stored back to back in node order
        later = self.cat_start[self.cat_start > start]
        end = int(later.min()) if later.size else int(self.cat_bits.shape[0])
        return np.flatnonzero(self.cat_bits[start:end])

    def scale(self, factor, cap=None):
        value = self.value * factor
        if cap is not None:
            value = np.clip(value, -cap, cap)
        self.value = np.where(self.is_leaf, value, 0.0)
        return self

    def predict_binned(self, binned, n_bins, out=None):
        if out is None:
            out = np.zeros(binned.shape[0])
        _add_tree_output(
            binned,
            self.feature,
            self.threshold_bin,
            self.missing_left,
            self.cat_start,
            self.cat_bits,
            self.left,
            self.right,
            self.value,
            np.asarray(n_bins, dtype=np.int64),
            out,
        )
        return out

    _ARRAYS = (
        "feature",
        "threshold_bin",
        "missing_left",
        "cat_start",
        "cat_bits",
        "left",
        "right",
        "value",
        "count",
        "sum_grad",
        "sum_hess",
        "gain",
    )
    _DTYPES = {
        "feature": np.int64,
        "threshold_bin": np.int64,
        "missing_left": np.bool_,
        "cat_start": np.int64,
        "cat_bits": np.bool_,
        "left": np.int64,
        "right": np.int64,
        "value": np.float64,
        "count": np.int64,
        "sum_grad": np.float64,
        "sum_hess": np.float64,
        "gain": np.float64,
    }

    def to_dict(self):
        return {name: getattr(self, name).tolist() for name in self._ARRAYS}

    @classmethod
    def from_dict(cls, d):
        return cls(**{name: np.asarray(d[name], dtype=cls._DTYPES[name]) for name in cls._ARRAYS})


@numba.njit(parallel=True, cache=True)
def _add_tree_output(binned, feature, thr, miss_left, cat_start, cat_bits, left, right, value, n_bins, out):
    for i in numba.prange(binned.shape[0]):
        node = 0
        while feature[node] >= 0:
            f = feature[node]
            b = np.int64(binned[i, f])
            if b == n_bins[f]:
                go_left = miss_left[node]
            elif cat_start[node] >= 0:
                go_left = cat_bits[cat_start[node] + b]
            else:
                go_left = b <= thr[node]
            node = left[node] if go_left else right[node]
        out[i] += value[node]


@numba.njit(cache=True)
def _partition(rows, col, nb, threshold, missing_left, is_cat, cat_mask):
    n = rows.shape[0]
    mask = np.empty(n, dtype=np.bool_)
    n_left = 0
    for i in range(n):
        b = np.int64(col[rows[i]])
        if b == nb:
            go = missing_left
        elif is_cat:
            go = cat_mask[b]
        else:
            go = b <= threshold
        mask[i] = go
        if go:
            n_left += 1
    left = np.empty(n_left, dtype=np.int64)
    right = np.empty(n - n_left, dtype=np.int64)
    li, ri = 0, 0
    for i in range(n):
        if mask[i]:
            left[li] = rows[i]
            li += 1
        else:
            right[ri] = rows[i]
            ri += 1
    return left, right


class _Node:
    __slots__ = ("rows", "hist", "totals", "split", "index")

    def __init__(self, rows, hist, totals, index):
        self.rows = rows
        self.hist = hist
        self.totals = totals
        self.split = None
        self.index = index


class HistogramSource:
    """Builds per-feature node histograms, directly or through feature bundles."""

    def __init__(self, binned, offsets, bundled=None):
        self.binned = binned
        self.offsets = offsets
        self.bundled = bundled

    def build(self, rows, grad, hess, totals):
        if self.bundled is None:
            return fill_histograms(self.binned, rows, grad, hess, self.offsets)
        store = fill_histograms(self.bundled.storage, rows, grad, hess, self.bundled.store_offsets)
        return self.bundled.expand(store, totals)


def _totals(rows, grad, hess):
    return np.array([np.sum(grad[rows]), np.sum(hess[rows]), float(rows.shape[0])])


def grow_tree_leafwise(
    binned,
    grad,
    hess,
    n_bins,
    is_categorical,
    max_leaves=31,
    min_data_in_leaf=5,
    rows=None,
    source=None,
    lam=LAMBDA,
):
    """Grow one tree by repeatedly splitting the frontier leaf with the largest gain.

    Parameters
    ----------
    binned : ndarray of uint16, shape (n_rows, n_features)
        Bin indices; bin ``n_bins[f]`` marks a missing value.
    grad, hess : ndarray of shape (n_rows,)
        Per-row gradient statistics (already weighted when sampling).
    n_bins : ndarray of int
    is_categorical : ndarray of bool
    rows : ndarray of int, optional
        Training population; defaults to every row.
    source : HistogramSource, optional
        Histogram builder, e.g. one that reads bundled columns.

    Returns
    -------
    Tree
        Leaf values are the raw Newton steps ``-G / (H + lam)``; the booster
        applies the learning rate.
    """
    n_bins = np.asarray(n_bins, dtype=np.int64)
    is_categorical = np.asarray(is_categorical, dtype=bool)
    offsets = np.concatenate([[0], np.cumsum(n_bins + 1)]).astype(np.int64)
    if rows is None:
        rows = np.arange(binned.shape[0], dtype=np.int64)
    if source is None:
        source = HistogramSource(binned, offsets)
    grad = np.ascontiguousarray(grad, dtype=np.float64)
    hess = np.ascontiguousarray(hess, dtype=np.float64)

    def find(node):
        node.split = best_split(node.hist, offsets, n_bins, is_categorical, node.totals, min_data_in_leaf, lam)

    # nodes[i] = [feature, threshold, missing_left, cat_bins, left, right, totals, gain]
    records = []

    def new_record(totals):
        records.append([-1, -1, False, None, -1, -1, totals, 0.0])
        return len(records) - 1

    root_totals = _totals(rows, grad, hess)
    root = _Node(rows, source.build(rows, grad, hess, root_totals), root_totals, new_record(root_totals))
    find(root)
    heap = []

    def push(node):
        if node.split is not None:
            heapq.heappush(heap, (-node.split.gain, node.index, node))

    push(root)
    n_leaves = 1
    while n_leaves < max_leaves and heap:
        _, _, node = heapq.heappop(heap)
        sp = node.split
        f = sp.feature
        cat_mask = np.zeros(max(n_bins[f], 1), dtype=np.bool_)
        if sp.is_categorical:
            cat_mask[sp.left_bins] = True
        left_rows, right_rows = _partition(
            node.rows,
            binned[:, f],
            n_bins[f],
            sp.threshold_bin,
            sp.missing_left,
            sp.is_categorical,
            cat_mask,
        )
        lt = _totals(left_rows, grad, hess)
        rt = _totals(right_rows, grad, hess)
        # build the smaller child and derive the larger one by subtraction
        if left_rows.shape[0] <= right_rows.shape[0]:
            lh = source.build(left_rows, grad, hess, lt)
            rh = node.hist - lh
        else:
            rh = source.build(right_rows, grad, hess, rt)
            lh = node.hist - rh
        li, ri = new_record(lt), new_record(rt)
        rec = records[node.index]
        rec[0] = f
        rec[1] = sp.threshold_bin
        rec[2] = sp.missing_left
        rec[3] = sp.left_bins
        rec[4], rec[5] = li, ri
        rec[7] = sp.gain
        node.hist = None
        for child in (_Node(left_rows, lh, lt, li), _Node(right_rows, rh, rt, ri)):
            find(child)
            push(child)
        n_leaves += 1
    return _assemble(records, n_bins, lam)


def _assemble(records, n_bins, lam):
    n = len(records)
    feature = np.array([r[0] for r in records], dtype=np.int64)
    threshold = np.array([r[1] for r in records], dtype=np.int64)
    missing_left = np.array([r[2] for r in records], dtype=np.bool_)
    left = np.array([r[4] for r in records], dtype=np.int64)
    right = np.array([r[5] for r in records], dtype=np.int64)
    totals = np.array([r[6] for r in records]).reshape(n, 3)
    gain = np.array([r[7] for r in records], dtype=np.float64)
    cat_start = np.full(n, -1, dtype=np.int64)
    bits = []
    pos = 0
    for i, r in enumerate(records):
        if r[3] is not None:
            mask = np.zeros(n_bins[r[0]], dtype=np.bool_)
            mask[r[3]] = True
            cat_start[i] = pos
            bits.append(mask)
            pos += mask.shape[0]
    cat_bits = np.concatenate(bits) if bits else np.zeros(0, dtype=np.bool_)
    value = np.where(feature < 0, -totals[:, 0] / (totals[:, 1] + lam), 0.0)
    return Tree(
        feature=feature,
        threshold_bin=threshold,
        missing_left=missing_left,
        cat_start=cat_start,
        cat_bits=cat_bits,
        left=left,
        right=right,
        value=value,
        count=totals[:, 2].astype(np.int64),
        sum_grad=totals[:, 0],
        sum_hess=totals[:, 1],
        gain=gain,
    )
