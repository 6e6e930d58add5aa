"""Sample-quality metrics and the empirical convergence-order fit."""

import warnings
from dataclasses import dataclass

import numpy as np

from .exceptions import FitError, ShapeError


def w1_1d(a, b):
    """Exact 1-Wasserstein distance between two equal-size 1D empirical samples."""
    a = np.sort(np.asarray(a, dtype=np.float64).ravel())
    b = np.sort(np.asarray(b, dtype=np.float64).ravel())
    if a.size != b.size:
        raise ShapeError(f"sample counts differ: {a.size} vs {b.size}")
    if a.size == 0:
        raise ShapeError("need at least one sample")
    return float(np.mean(np.abs(a - b)))


def moment_error(samples, target_mean, target_var):
    """L2 errors of the per-dimension sample mean and (ddof=1) variance."""
    x = np.asarray(samples, dtype=np.float64)
    if len(x) < 2:
        raise ShapeError("moment_error needs at least two samples")
    mean_err = np.linalg.norm((x.mean(axis=0) - target_mean).ravel())
    var_err = np.linalg.norm((x.var(axis=0, ddof=1) - target_var).ravel())
    return float(mean_err), float(var_err)


@dataclass(frozen=True)
class OrderFit:
    steps: tuple
    errors: tuple
    slope: float
    intercept: float
    residual: float


def fit_order(pairs):
    """Least-squares slope of ``log e`` against ``log h`` over ``(h, e)`` pairs.

    Exactly-zero errors carry no slope information and are dropped with a
    warning; at least three points must remain.
    """
    pairs = [(float(h), float(e)) for h, e in pairs]
    kept = [(h, e) for h, e in pairs if e > 0]
    if len(kept) < len(pairs):
        warnings.warn(f"dropped {len(pairs) - len(kept)} zero-error point(s) from order fit",
                      RuntimeWarning, stacklevel=2)
    if len(kept) < 3:
        raise FitError(f"need >= 3 points with positive error, got {len(kept)}")
    h, e = np.array(kept).T
    A = np.column_stack([np.log(h), np.ones_like(h)])
    coef, res, *_ = np.linalg.lstsq(A, np.log(e), rcond=None)
    residual = float(np.sqrt(res[0] / len(h))) if res.size else 0.0
    return OrderFit(tuple(h), tuple(e), float(coef[0]), float(coef[1]), residual)


def trajectory_error(state, exact):
    """Mean over the batch of per-sample L2 errors."""
    diff = np.asarray(state) - np.asarray(exact)
    return float(np.mean(np.linalg.norm(diff.reshape(len(diff), -1), axis=1)))
