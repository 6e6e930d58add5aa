"""Orthonormal DCT-II and the radial sigmoid high-pass filter.

The 2D transform acts on the last two axes, so ``(H, W)``, ``(C, H, W)`` and
batched ``(B, C, H, W)`` arrays are all accepted.  Transforms are computed as
two separable matrix products with an explicit cosine basis; at the image
sizes used here (H, W <= 64) that is exact to rounding and fast enough.
"""

import numbers
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import expit
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_scalar
from .exceptions import ShapeError


@lru_cache(maxsize=64)
def _basis(n):
    k = np.arange(n)[:, None]
    x = np.arange(n)[None, :]
    c = np.cos(np.pi * (2 * x + 1) * k / (2 * n))
    c *= np.sqrt(2.0 / n)
    c[0] /= np.sqrt(2.0)
    c.setflags(write=False)
    return c


def dct_matrix(n):
    """Orthonormal DCT-II matrix ``C`` with ``X = C @ x``; rows are basis vectors."""
    if n < 1:
        raise ShapeError("DCT length must be >= 1")
    return _basis(int(n))


def _check_image(x):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim < 2:
        raise ShapeError(f"expected an image-shaped array (..., H, W), got shape {x.shape}")
    return x


def dct2(x):
    """Orthonormal 2D DCT-II over the last two axes."""
    x = _check_image(x)
    ch = dct_matrix(x.shape[-2])
    cw = dct_matrix(x.shape[-1])
    return ch @ x @ cw.T


def idct2(X):
    """Inverse of :func:`dct2`."""
    X = _check_image(X)
    ch = dct_matrix(X.shape[-2])
    cw = dct_matrix(X.shape[-1])
    return ch.T @ X @ cw


def dct1(x):
    """Orthonormal 1D DCT-II over the last axis."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim < 1:
        raise ShapeError("dct1 needs at least one axis")
    return x @ dct_matrix(x.shape[-1]).T


def idct1(X):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim < 1:
        raise ShapeError("idct1 needs at least one axis")
    return X @ dct_matrix(X.shape[-1])


@lru_cache(maxsize=32)
def _mask2d(h, w, threshold, sharpness):
    u = np.arange(h).reshape(h, 1) / h
    v = np.arange(w).reshape(1, w) / w
    d = np.sqrt(u**2 + v**2)
    m = expit((d - threshold) * sharpness)
    m.setflags(write=False)
    return m


@lru_cache(maxsize=32)
def _mask1d(n, threshold, sharpness):
    d = np.arange(n) / n
    m = expit((d - threshold) * sharpness)
    m.setflags(write=False)
    return m


def highpass_mask(h, w, threshold=0.05, sharpness=50.0):
    """Sigmoid mask ``sigmoid(sharpness * (d - threshold))`` on the DCT grid.

    ``d`` is the distance of ``(u/H, v/W)`` from the DC coefficient.
    """
    check_scalar(sharpness, "sharpness", numbers.Real, min_val=0.0, include_boundaries="neither")
    return _mask2d(int(h), int(w), float(threshold), float(sharpness))


def highpass_mask_1d(n, threshold=0.05, sharpness=50.0):
    """1D analogue of :func:`highpass_mask` with radius ``u / N``."""
    check_scalar(sharpness, "sharpness", numbers.Real, min_val=0.0, include_boundaries="neither")
    return _mask1d(int(n), float(threshold), float(sharpness))


@dataclass(frozen=True)
class FreqMask:
    """Radial high-pass mask parameters; values are cached per grid size."""

    threshold: float = 0.05
    sharpness: float = 50.0

    def __post_init__(self):
        check_scalar(self.threshold, "threshold", numbers.Real)
        check_scalar(self.sharpness, "sharpness", numbers.Real, min_val=0.0,
                     include_boundaries="neither")

    def values(self, h, w):
        return highpass_mask(h, w, self.threshold, self.sharpness)

    def values_1d(self, n):
        return highpass_mask_1d(n, self.threshold, self.sharpness)


def filter_update(delta, mask):
    """Apply ``idct2(mask * dct2(delta))``; the mask broadcasts over leading axes."""
    delta = _check_image(delta)
    m = mask.values(*delta.shape[-2:])
    return idct2(m * dct2(delta))


def filter_update_1d(delta, mask):
    delta = np.asarray(delta, dtype=np.float64)
    m = mask.values_1d(delta.shape[-1])
    return idct1(m * dct1(delta))


class HighPassDCTFilter(TransformerMixin, BaseEstimator):
    """High-pass filter in the orthonormal DCT domain, as a transformer.

    ``fit`` only records the spatial shape; ``transform`` accepts arrays
    whose trailing two axes match it.

    Parameters
    ----------
    threshold : float, default=0.05
        Normalized radius at which the mask equals 0.5.
    sharpness : float, default=50.0
        Slope of the sigmoid transition.
    """

    def __init__(self, threshold=0.05, sharpness=50.0):
        self.threshold = threshold
        self.sharpness = sharpness

    def fit(self, X, y=None):
        X = _check_image(X)
        self.mask_ = FreqMask(self.threshold, self.sharpness)
        self.spatial_shape_ = X.shape[-2:]
        return self

    def transform(self, X):
        check_is_fitted(self, "mask_")
        X = _check_image(X)
        if X.shape[-2:] != self.spatial_shape_:
            raise ShapeError(
                f"fitted on spatial shape {self.spatial_shape_}, got {X.shape[-2:]}"
            )
        return filter_update(X, self.mask_)
