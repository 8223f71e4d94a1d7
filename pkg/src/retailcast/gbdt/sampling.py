import math

import numpy as np

from .._validation import check_fraction
from ..exceptions import InvalidArgumentError


def goss_sample(gradients, a, b, rng):
    """Gradient-based one-side sampling.

    Keeps the ``ceil(a n)`` rows with the largest absolute gradient at weight
    1 and a uniform draw of ``ceil(b n)`` of the remaining rows at weight
    ``(1 - a) / b``; everything else is dropped for this round.

    Parameters
    ----------
    gradients : array-like of shape (n,)
    a, b : float
        Top and random fractions, ``a + b <= 1``.
    rng : numpy.random.Generator

    Returns
    -------
    rows : ndarray of int64
        Selected row indices in increasing order.
    weights : ndarray of float64
        Weight of each selected row, aligned with ``rows``.
    """
    g = np.asarray(gradients, dtype=np.float64)
    a = check_fraction(a, "a")
    b = check_fraction(b, "b")
    if a + b > 1.0 + 1e-12:
        raise InvalidArgumentError(f"a + b must be <= 1, got {a + b}")
    n = g.shape[0]
    n_top = min(n, math.ceil(a * n))
    n_rand = min(n - n_top, math.ceil(b * n)) if b > 0 else 0

    if n_top == n:
        return np.arange(n, dtype=np.int64), np.ones(n)
    mag = np.abs(g)
    if n_top > 0:
        top = np.argpartition(-mag, n_top - 1)[:n_top]
        is_top = np.zeros(n, dtype=bool)
        is_top[top] = True
        rest = np.flatnonzero(~is_top)
    else:
        is_top = np.zeros(n, dtype=bool)
        rest = np.arange(n)
    picked = rng.choice(rest, size=n_rand, replace=False) if n_rand > 0 else rest[:0]

    weight = np.zeros(n)
    weight[is_top] = 1.0
    if n_rand > 0:
        weight[picked] = (1.0 - a) / b
    rows = np.flatnonzero(weight > 0).astype(np.int64)
    return rows, weight[rows]
