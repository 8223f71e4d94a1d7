"""Exclusive feature bundling.

Sparse features that are rarely nonzero on the same row are merged into a
single histogram column. The merged column stores 0 when every member sits
at its default (zero) bin and otherwise ``base[f] + rank`` of the member's
non-default bin, so member ranges never overlap and each member's
histogram can be decoded back exactly (up to rows in conflict).
"""

from dataclasses import dataclass, field

import numba
import numpy as np

from ..exceptions import InvalidArgumentError


@dataclass
class Bundle:
    features: list
    offsets: list = field(default_factory=list)
    conflicts: int = 0


def conflict_matrix(nonzero):
    """Pairwise counts of rows where both features are nonzero."""
    nz = np.asarray(nonzero, dtype=np.float32)
    # float32 is exact for counts below 2**24; fall back to int64 above that
    if nz.shape[0] >= 2**24:
        nz64 = np.asarray(nonzero, dtype=np.int64)
        return nz64.T @ nz64
    return np.rint(nz.T @ nz).astype(np.int64)


def efb_bundle(columns, max_conflict=0, sizes=None):
    """Greedy bundling of feature columns.

    Features are visited by nonzero count (descending, ties by index); each
    joins the first bundle whose total conflict stays within
    ``max_conflict`` after adding its conflicts with every current member,
    otherwise it opens a new bundle.

    Parameters
    ----------
    columns : array-like of shape (n_rows, n_features)
        Feature values; a value counts as nonzero when it is not 0 and not NaN.
    max_conflict : int
        Conflict budget per bundle.
    sizes : sequence of int, optional
        Value-range width of each feature inside a bundle. When given, each
        bundle member receives an offset equal to 1 plus the widths of the
        members before it. Defaults to 1 per feature.

    Returns
    -------
    list of Bundle
    """
    X = np.asarray(columns, dtype=np.float64)
    if X.ndim != 2:
        raise InvalidArgumentError(f"columns must be 2-D, got shape {X.shape}")
    if max_conflict < 0:
        raise InvalidArgumentError(f"max_conflict must be >= 0, got {max_conflict}")
    nonzero = (X != 0) & ~np.isnan(X)
    return _greedy_bundles(nonzero, int(max_conflict), sizes)


def _greedy_bundles(nonzero, max_conflict, sizes=None):
    n_features = nonzero.shape[1]
    if sizes is None:
        sizes = np.ones(n_features, dtype=np.int64)
    counts = nonzero.sum(axis=0)
    conf = conflict_matrix(nonzero)
    order = sorted(range(n_features), key=lambda f: (-int(counts[f]), f))
    bundles = []
    for f in order:
        for bundle in bundles:
            added = int(sum(conf[f, g] for g in bundle.features))
            if bundle.conflicts + added <= max_conflict:
                bundle.features.append(f)
                bundle.conflicts += added
                break
        else:
            bundles.append(Bundle([f], conflicts=0))
    for bundle in bundles:
        base = 1
        for f in bundle.features:
            bundle.offsets.append(base)
            base += int(sizes[f])
    return bundles


@numba.njit(cache=True)
def _encode_bundle(binned, feats, bases, defaults, out):
    for i in range(binned.shape[0]):
        v = 0
        for j in range(feats.shape[0]):
            b = np.int64(binned[i, feats[j]])
            d = defaults[j]
            if b != d:
                v = bases[j] + (b if b < d else b - 1)
        out[i] = v


@numba.njit(cache=True)
def _expand_histograms(store, feat_offsets, n_bins, src, mode, bases, defaults, totals, out):
    for f in range(n_bins.shape[0]):
        fo = feat_offsets[f]
        nb = n_bins[f]
        s = src[f]
        if mode[f] == 0:
            for b in range(nb + 1):
                for c in range(3):
                    out[fo + b, c] = store[s + b, c]
        else:
            d = defaults[f]
            acc0, acc1, acc2 = 0.0, 0.0, 0.0
            for b in range(nb):
                if b == d:
                    continue
                v = s + bases[f] + (b if b < d else b - 1)
                out[fo + b, 0] = store[v, 0]
                out[fo + b, 1] = store[v, 1]
                out[fo + b, 2] = store[v, 2]
                acc0 += store[v, 0]
                acc1 += store[v, 1]
                acc2 += store[v, 2]
            out[fo + d, 0] = totals[0] - acc0
            out[fo + d, 1] = totals[1] - acc1
            out[fo + d, 2] = totals[2] - acc2
            out[fo + nb, 0] = 0.0
            out[fo + nb, 1] = 0.0
            out[fo + nb, 2] = 0.0


class BundledStore:
    """Histogram storage over bundled columns with decoding to per-feature histograms.

    Only numeric features without missing values take part in bundling;
    the rest keep their own column.
    """

    def __init__(self, binned, n_bins, default_bins, eligible, max_conflict):
        n_rows, n_features = binned.shape
        self.n_bins = np.asarray(n_bins, dtype=np.int64)
        elig = np.flatnonzero(eligible)
        nonzero = np.zeros((n_rows, elig.size), dtype=bool)
        for j, f in enumerate(elig):
            nonzero[:, j] = binned[:, f] != default_bins[f]
        sizes = self.n_bins[elig] - 1
        local = _greedy_bundles(nonzero, max_conflict, sizes) if elig.size else []

        columns, col_sizes = [], []
        src_col = np.zeros(n_features, dtype=np.int64)
        mode = np.zeros(n_features, dtype=np.int64)
        bases = np.zeros(n_features, dtype=np.int64)
        self.bundles = []
        for f in range(n_features):
            if not eligible[f]:
                src_col[f] = len(columns)
                columns.append(binned[:, f])
                col_sizes.append(self.n_bins[f] + 1)
        for bundle in local:
            feats = elig[bundle.features]
            if len(feats) == 1:
                f = feats[0]
                src_col[f] = len(columns)
                columns.append(binned[:, f])
                col_sizes.append(self.n_bins[f] + 1)
                continue
            self.bundles.append(Bundle(list(map(int, feats)), list(bundle.offsets), bundle.conflicts))
            width = 1 + int(sizes[bundle.features].sum())
            if width + 1 > np.iinfo(np.uint16).max:
                raise InvalidArgumentError("bundle too wide for 16-bit bin storage")
            encoded = np.empty(n_rows, dtype=np.uint16)
            _encode_bundle(
                binned,
                feats.astype(np.int64),
                np.asarray(bundle.offsets, dtype=np.int64),
                np.asarray(default_bins, dtype=np.int64)[feats],
                encoded,
            )
            for f, base in zip(feats, bundle.offsets):
                src_col[f] = len(columns)
                mode[f] = 1
                bases[f] = base
            columns.append(encoded)
            col_sizes.append(width + 1)

        self.storage = np.empty((n_rows, len(columns)), dtype=np.uint16, order="F")
        for j, col in enumerate(columns):
            self.storage[:, j] = col
        self.store_offsets = np.concatenate([[0], np.cumsum(col_sizes)]).astype(np.int64)
        self.feat_offsets = np.concatenate([[0], np.cumsum(self.n_bins + 1)]).astype(np.int64)
        self.src = self.store_offsets[src_col]
        self.mode = mode
        self.bases = bases
        self.defaults = np.asarray(default_bins, dtype=np.int64)

    @property
    def n_bundled(self):
        return sum(len(b.features) for b in self.bundles)

    def expand(self, store_hist, totals):
        out = np.empty((int(self.feat_offsets[-1]), 3))
        _expand_histograms(
            store_hist,
            self.feat_offsets,
            self.n_bins,
            self.src,
            self.mode,
            self.bases,
            self.defaults,
            np.asarray(totals, dtype=np.float64),
            out,
        )
        return out
