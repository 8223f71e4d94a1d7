"""Loss gradients, link functions and training losses."""

import numpy as np

from ..exceptions import InvalidArgumentError


def poisson_grad_hess(score, y):
    """Gradient and hessian of the log-link poisson loss ``exp(f) - y f``."""
    score = np.asarray(score, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if np.any(y < 0):
        raise InvalidArgumentError("poisson targets must be non-negative")
    mu = np.exp(score)
    return mu - y, mu


def squared_grad_hess(score, y):
    score = np.asarray(score, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    return score - y, np.ones_like(score)


def grad_hess(objective, score, y):
    if objective == "poisson":
        return poisson_grad_hess(score, y)
    return squared_grad_hess(score, y)


def base_score(objective, y):
    if objective == "poisson":
        return float(np.log(np.mean(y) + 1e-8))
    return float(np.mean(y))


def inverse_link(objective, score):
    if objective == "poisson":
        return np.exp(score)
    return np.asarray(score, dtype=np.float64)


def training_loss(objective, score, y):
    """Mean poisson negative log-likelihood (without the ``log y!`` constant) or half-MSE."""
    if objective == "poisson":
        return float(np.mean(np.exp(score) - y * score))
    return float(0.5 * np.mean((score - y) ** 2))
