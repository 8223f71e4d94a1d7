"""Histogram split search.

Gain of a split with left/right sums ``(G_L, H_L)`` and ``(G_R, H_R)`` is
``G_L²/(H_L+λ) + G_R²/(H_R+λ) − G²/(H+λ)``. Numeric features scan every bin
threshold with the missing bin sent either way; categorical features sort
occupied categories by ``Σgrad/Σhess`` and scan prefix partitions.
Ties keep the first candidate in (feature, missing direction with right
first, threshold) order, which makes the search deterministic.
"""

from dataclasses import dataclass

import numba
import numpy as np

from .params import LAMBDA

# a gain must exceed this fraction of the involved scores to count as positive;
# it only filters out floating-point noise on splits that gain nothing
GAIN_RTOL = 1e-12


@numba.njit(cache=True)
def _score(g, h, lam):
    return g * g / (h + lam)


@numba.njit(cache=True)
def _category_order(hist, off, nb):
    """Occupied category bins sorted by Σgrad/Σhess (stable on bin index)."""
    n_occ = 0
    for b in range(nb):
        if hist[off + b, 2] > 0:
            n_occ += 1
    bins = np.empty(n_occ, dtype=np.int64)
    ratio = np.empty(n_occ)
    j = 0
    for b in range(nb):
        if hist[off + b, 2] > 0:
            bins[j] = b
            h = hist[off + b, 1]
            ratio[j] = hist[off + b, 0] / h if h > 0 else 0.0
            j += 1
    order = np.argsort(ratio, kind="mergesort")
    return bins[order]


@numba.njit(cache=True)
def _find_best_split(hist, offsets, n_bins, is_cat, totals, min_leaf, lam):
    """Return (gain, feature, threshold, missing_left, G_L, H_L, C_L); feature -1 if none.

    For categorical features ``threshold`` is the number of sorted categories
    placed on the left.
    """
    G, H, C = totals[0], totals[1], totals[2]
    parent = _score(G, H, lam)
    best_gain = 0.0
    best_f, best_t, best_ml = -1, -1, False
    best_gl, best_hl, best_cl = 0.0, 0.0, 0.0
    if C < 2 * min_leaf:
        return best_gain, best_f, best_t, best_ml, best_gl, best_hl, best_cl
    n_features = n_bins.shape[0]
    for f in range(n_features):
        off = offsets[f]
        nb = n_bins[f]
        gm, hm, cm = hist[off + nb, 0], hist[off + nb, 1], hist[off + nb, 2]
        n_dirs = 2 if cm > 0 else 1
        if is_cat[f]:
            order = _category_order(hist, off, nb)
            n_scan = order.shape[0]
        else:
            order = np.arange(nb)
            n_scan = nb
        for d in range(n_dirs):
            ml = d == 1
            gl, hl, cl = 0.0, 0.0, 0.0
            if ml:
                gl, hl, cl = gm, hm, cm
            for k in range(n_scan):
                b = order[k]
                gl += hist[off + b, 0]
                hl += hist[off + b, 1]
                cl += hist[off + b, 2]
                if cl < min_leaf:
                    continue
                cr = C - cl
                if cr < min_leaf:
                    break
                gr = G - gl
                hr = H - hl
                sl = _score(gl, hl, lam)
                sr = _score(gr, hr, lam)
                gain = sl + sr - parent
                if gain > GAIN_RTOL * (sl + sr + parent) and gain > best_gain:
                    best_gain = gain
                    best_f = f
                    best_t = k + 1 if is_cat[f] else b
                    best_ml = ml
                    best_gl, best_hl, best_cl = gl, hl, cl
    return best_gain, best_f, best_t, best_ml, best_gl, best_hl, best_cl


@dataclass
class SplitCandidate:
    """Best split of a node.

    ``threshold_bin`` sends bins ``<= threshold_bin`` left for numeric
    features; ``left_bins`` lists the category bins sent left for
    categorical ones. Missing values follow ``missing_left``.
    """

    feature: int
    gain: float
    missing_left: bool
    threshold_bin: int = -1
    left_bins: np.ndarray = None
    left_sums: tuple = (0.0, 0.0, 0)

    @property
    def is_categorical(self):
        return self.left_bins is not None

    def goes_left(self, bins, n_bins_f):
        """Boolean routing of binned values of the split feature."""
        bins = np.asarray(bins)
        missing = bins == n_bins_f
        if self.is_categorical:
            left = np.isin(bins, self.left_bins)
        else:
            left = bins <= self.threshold_bin
        return np.where(missing, self.missing_left, left)


def best_split(hist, offsets, n_bins, is_categorical, totals, min_data_in_leaf, lam=LAMBDA):
    """Maximal-gain admissible split of a node, or ``None``.

    Parameters
    ----------
    hist : ndarray of shape (total_bins, 3)
        Flat (Σgrad, Σhess, count) histograms of the node, laid out by ``offsets``.
    offsets, n_bins : ndarray of int
        Histogram slice start and non-missing bin count of each feature.
    is_categorical : ndarray of bool
    totals : sequence of 3 floats
        (Σgrad, Σhess, count) of the node population.
    min_data_in_leaf : int
        Splits leaving fewer rows in either child are disqualified.
    """
    hist = np.ascontiguousarray(hist, dtype=np.float64)
    offsets = np.asarray(offsets, dtype=np.int64)
    n_bins = np.asarray(n_bins, dtype=np.int64)
    is_categorical = np.asarray(is_categorical, dtype=np.bool_)
    totals = np.asarray(totals, dtype=np.float64)
    gain, f, t, ml, gl, hl, cl = _find_best_split(
        hist, offsets, n_bins, is_categorical, totals, float(min_data_in_leaf), lam
    )
    if f < 0:
        return None
    left_sums = (float(gl), float(hl), int(round(cl)))
    if is_categorical[f]:
        order = _category_order(hist, offsets[f], n_bins[f])
        left_bins = np.sort(order[:t])
        return SplitCandidate(int(f), float(gain), bool(ml), left_bins=left_bins, left_sums=left_sums)
    return SplitCandidate(int(f), float(gain), bool(ml), threshold_bin=int(t), left_sums=left_sums)
