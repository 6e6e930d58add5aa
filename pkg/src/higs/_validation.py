"""Input validation helpers shared by the estimators and samplers."""

import numbers

import numpy as np
from sklearn.utils import check_scalar as _sk_check_scalar

from .exceptions import ConfigError, DomainError, ShapeError


def check_state(x, name="state", ndim=None, allow_nan=False):
    """Return ``x`` as a float64 array, checking finiteness and rank."""
    arr = np.asarray(x, dtype=np.float64)
    if ndim is not None and arr.ndim not in np.atleast_1d(ndim):
        raise ShapeError(f"{name} must have ndim in {ndim}, got shape {arr.shape}")
    if not allow_nan and not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    return arr


def check_same_shape(a, b, names=("a", "b")):
    if np.shape(a) != np.shape(b):
        raise ShapeError(
            f"{names[0]} shape {np.shape(a)} does not match {names[1]} shape {np.shape(b)}"
        )


def check_time(t, name="t"):
    """Scalar time must be a positive real."""
    if not np.isscalar(t) and np.ndim(t) != 0:
        raise DomainError(f"{name} must be a scalar, got shape {np.shape(t)}")
    t = float(t)
    if not np.isfinite(t) or t <= 0.0:
        raise DomainError(f"{name} must be > 0, got {t}")
    return t


def check_scalar(value, name, target_type=numbers.Real, min_val=None, max_val=None,
                 include_boundaries="both"):
    """``sklearn.utils.check_scalar`` that raises ConfigError instead."""
    if isinstance(value, bool) and target_type is not bool:
        raise ConfigError(f"{name} must be {target_type}, got bool")
    try:
        return _sk_check_scalar(value, name, target_type, min_val=min_val,
                                max_val=max_val, include_boundaries=include_boundaries)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def check_option(value, name, options):
    if value not in options:
        raise ConfigError(f"{name} must be one of {sorted(options)}, got {value!r}")
    return value
