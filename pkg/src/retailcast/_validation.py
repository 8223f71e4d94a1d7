"""Input validation helpers used across estimators and functional APIs."""

import numbers

import numpy as np

from .exceptions import InvalidArgumentError


def check_positive_int(value, name, minimum=1):
    """Return ``value`` as int, raising if it is not an integer >= ``minimum``."""
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise InvalidArgumentError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise InvalidArgumentError(f"{name} must be >= {minimum}, got {value}")
    return int(value)


def check_nonneg_int(value, name):
    return check_positive_int(value, name, minimum=0)


def check_positive_float(value, name):
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise InvalidArgumentError(f"{name} must be a real number, got {value!r}")
    value = float(value)
    if not np.isfinite(value) or value <= 0:
        raise InvalidArgumentError(f"{name} must be positive and finite, got {value}")
    return value


def check_fraction(value, name):
    if isinstance(value, bool) or not isinstance(value, numbers.Real):
        raise InvalidArgumentError(f"{name} must be a real number, got {value!r}")
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise InvalidArgumentError(f"{name} must lie in [0, 1], got {value}")
    return value


def as_float_vector(values, name="values", allow_empty=False, allow_nan=False):
    """Convert to a contiguous 1-d float64 array with basic sanity checks."""
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1:
        raise InvalidArgumentError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if not allow_empty and arr.size == 0:
        raise InvalidArgumentError(f"{name} must not be empty")
    if not allow_nan and not np.all(np.isfinite(arr)):
        raise InvalidArgumentError(f"{name} contains non-finite values")
    return np.ascontiguousarray(arr)


def check_same_length(a, b, names=("actual", "predicted")):
    if len(a) != len(b):
        raise InvalidArgumentError(
            f"{names[0]} and {names[1]} differ in length ({len(a)} != {len(b)})"
        )


def check_is_fitted(estimator, attributes):
    """Raise a ``NotFittedError`` when ``estimator`` lacks the fitted attributes."""
    from sklearn.exceptions import NotFittedError

    if isinstance(attributes, str):
        attributes = [attributes]
    if not all(getattr(estimator, attr, None) is not None for attr in attributes):
        raise NotFittedError(
            f"This {type(estimator).__name__} instance is not fitted yet; call 'fit' first."
        )
