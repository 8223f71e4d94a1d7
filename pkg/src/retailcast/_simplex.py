"""Derivative-free Nelder-Mead minimizer.

scipy's implementation stops on an absolute function tolerance; the model
fitters here want a relative one and need the best vertex back when the
iteration cap is hit, so this small version is kept in-house.
"""

from dataclasses import dataclass

import numpy as np


@dataclass
class SimplexResult:
    x: np.ndarray
    fun: float
    n_iter: int
    converged: bool


def nelder_mead(fun, x0, step=0.1, rel_tol=1e-10, max_iter=2000, abs_tol=1e-300):
    """Minimize ``fun`` starting from ``x0``.

    Converges when the spread of function values across the simplex falls
    below ``rel_tol * |f_best|`` (plus ``abs_tol`` to cover a zero optimum).
    Non-finite function values are treated as +inf.
    """
    x0 = np.asarray(x0, dtype=float)
    dim = x0.shape[0]

    def f(x):
        v = fun(x)
        return v if np.isfinite(v) else np.inf

    simplex = np.empty((dim + 1, dim))
    simplex[0] = x0
    for i in range(dim):
        vertex = x0.copy()
        vertex[i] = vertex[i] + step if vertex[i] == 0 else vertex[i] * (1 + step)
        simplex[i + 1] = vertex
    values = np.array([f(v) for v in simplex])

    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        order = np.argsort(values, kind="stable")
        simplex, values = simplex[order], values[order]
        best, worst = values[0], values[-1]
        if np.isfinite(worst) and worst - best <= rel_tol * abs(best) + abs_tol:
            converged = True
            break

        centroid = simplex[:-1].mean(axis=0)
        reflected = centroid + (centroid - simplex[-1])
        f_r = f(reflected)
        if f_r < values[0]:
            expanded = centroid + 2.0 * (centroid - simplex[-1])
            f_e = f(expanded)
            if f_e < f_r:
                simplex[-1], values[-1] = expanded, f_e
            else:
                simplex[-1], values[-1] = reflected, f_r
            continue
        if f_r < values[-2]:
            simplex[-1], values[-1] = reflected, f_r
            continue
        if f_r < values[-1]:
            contracted = centroid + 0.5 * (reflected - centroid)
        else:
            contracted = centroid + 0.5 * (simplex[-1] - centroid)
        f_c = f(contracted)
        if f_c < min(f_r, values[-1]):
            simplex[-1], values[-1] = contracted, f_c
            continue
        # shrink towards the best vertex
        simplex[1:] = simplex[0] + 0.5 * (simplex[1:] - simplex[0])
        values[1:] = [f(v) for v in simplex[1:]]

    i_best = int(np.argmin(values))
    return SimplexResult(simplex[i_best].copy(), float(values[i_best]), it, converged)
