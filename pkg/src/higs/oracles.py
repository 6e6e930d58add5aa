"""Analytic diffusion processes with closed-form denoisers.

Each oracle describes a data distribution ``p_0`` and, for ``z = x + t * eps``,
returns the exact posterior mean ``E[x | z]``.  They stand in for trained
networks so samplers can be checked against known answers.

All oracles take batched inputs: ``z`` has shape ``(B, *oracle.shape)``.
"""

import numbers

import numpy as np
from scipy.special import logsumexp
from scipy.stats import norm

from ._validation import check_scalar, check_time
from .exceptions import ConfigError, DomainError, ShapeError
from .transform import dct2, dct_matrix, idct2


def _check_batch(z, shape):
    z = np.asarray(z, dtype=np.float64)
    if z.shape[1:] != tuple(shape):
        raise ShapeError(f"expected batch of shape (B, {', '.join(map(str, shape))}), got {z.shape}")
    return z


class GaussianOracle:
    """Isotropic Gaussian data ``N(mean, scale**2 I)``."""

    def __init__(self, mean, scale=1.0):
        self.mean = np.atleast_1d(np.asarray(mean, dtype=np.float64))
        self.scale = float(check_scalar(scale, "scale", numbers.Real, min_val=0.0,
                                        include_boundaries="neither"))
        self.shape = self.mean.shape

    def __call__(self, z, t, y=None):
        return self.denoise(z, t, y)

    def denoise(self, z, t, y=None):
        t = check_time(t)
        z = _check_batch(z, self.shape)
        s2 = self.scale**2
        return self.mean + (s2 / (s2 + t * t)) * (z - self.mean)

    def marginal_var(self, t):
        return self.scale**2 + t * t

    def log_prob(self, z, t):
        """Log density of the noisy marginal ``p_t``; one value per batch row."""
        z = _check_batch(z, self.shape)
        v = self.marginal_var(t)
        d = self.mean.size
        r2 = ((z - self.mean) ** 2).reshape(len(z), -1).sum(axis=1)
        return -0.5 * r2 / v - 0.5 * d * np.log(2 * np.pi * v)

    def exact_trajectory(self, z, t_from, t_to):
        """Transport ``z`` along the probability-flow ODE from ``t_from`` to ``t_to``."""
        if t_to > t_from:
            raise DomainError(f"t_to={t_to} must not exceed t_from={t_from}")
        if t_to < 0:
            raise DomainError("t_to must be >= 0")
        z = np.asarray(z, dtype=np.float64)
        s2 = self.scale**2
        return self.mean + (z - self.mean) * np.sqrt((s2 + t_to**2) / (s2 + t_from**2))

    def data_quantiles(self, n):
        """``n`` evenly spaced quantiles of ``p_0`` (1D only)."""
        if self.mean.size != 1:
            raise ShapeError("quantiles only defined for 1D oracles")
        q = (np.arange(n) + 0.5) / n
        return self.mean[0] + self.scale * norm.ppf(q)

    def data_moments(self):
        return self.mean.copy(), np.full(self.shape, self.scale**2)


class MixtureOracle:
    """Gaussian mixture; label ``k`` selects component ``k``, ``None`` the full mixture.

    Parameters
    ----------
    weights : array of shape (K,)
        Mixing proportions, normalized on construction.
    means : array of shape (K, *shape)
    scales : array of shape (K,)
        Isotropic standard deviation of each component.
    """

    def __init__(self, weights, means, scales):
        w = np.asarray(weights, dtype=np.float64).ravel()
        if w.size < 1 or np.any(w <= 0):
            raise ConfigError("mixture weights must be positive and non-empty")
        self.weights = w / w.sum()
        means = np.asarray(means, dtype=np.float64)
        if means.ndim == 1:
            means = means[:, None]
        if means.shape[0] != w.size:
            raise ConfigError(f"{w.size} weights but {means.shape[0]} means")
        self.means = means
        self.scales = np.broadcast_to(np.asarray(scales, dtype=np.float64), w.shape).copy()
        if np.any(self.scales <= 0):
            raise ConfigError("mixture scales must be positive")
        self.shape = means.shape[1:]
        self.n_components = w.size

    def __call__(self, z, t, y=None):
        return self.denoise(z, t, y)

    def _component_means(self, z, t):
        # (K, B, *shape) posterior means per component
        s2 = self.scales**2
        shrink = (s2 / (s2 + t * t)).reshape((-1,) + (1,) * (z.ndim))
        mu = self.means[:, None]
        return mu + shrink * (z[None] - mu)

    def _log_joint(self, z, t):
        # log pi_k + log N(z; mu_k, (s_k^2 + t^2) I), shape (K, B)
        v = self.scales**2 + t * t
        d = int(np.prod(self.shape))
        diff = (z[None] - self.means[:, None]).reshape(self.n_components, len(z), -1)
        r2 = (diff**2).sum(axis=-1)
        return (np.log(self.weights)[:, None] - 0.5 * r2 / v[:, None]
                - 0.5 * d * np.log(2 * np.pi * v)[:, None])

    def responsibilities(self, z, t):
        z = _check_batch(z, self.shape)
        lj = self._log_joint(z, t)
        return np.exp(lj - logsumexp(lj, axis=0, keepdims=True))

    def log_prob(self, z, t):
        z = _check_batch(z, self.shape)
        return logsumexp(self._log_joint(z, t), axis=0)

    def denoise(self, z, t, y=None):
        t = check_time(t)
        z = _check_batch(z, self.shape)
        if y is not None:
            k = self._check_label(y)
            s2 = self.scales[k] ** 2
            mu = self.means[k]
            return mu + (s2 / (s2 + t * t)) * (z - mu)
        means = self._component_means(z, t)
        lj = self._log_joint(z, t)
        r = np.exp(lj - logsumexp(lj, axis=0, keepdims=True))
        r = r.reshape(r.shape + (1,) * len(self.shape))
        return (r * means).sum(axis=0)

    def _check_label(self, y):
        if isinstance(y, bool) or not isinstance(y, numbers.Integral):
            raise ConfigError(f"label must be an integer component index, got {y!r}")
        if not 0 <= y < self.n_components:
            raise ConfigError(f"label {y} out of range for {self.n_components} components")
        return int(y)

    def component(self, k):
        k = self._check_label(k)
        return GaussianOracle(self.means[k], self.scales[k])

    def cdf(self, x, t=0.0, y=None):
        """Marginal CDF of ``p_t`` (1D only)."""
        self._require_1d()
        x = np.asarray(x, dtype=np.float64)[..., None]
        sd = np.sqrt(self.scales**2 + t * t)
        c = norm.cdf((x - self.means[:, 0]) / sd)
        if y is not None:
            return c[..., self._check_label(y)]
        return (c * self.weights).sum(axis=-1)

    def data_quantiles(self, n, y=None, tol=1e-12):
        """``n`` evenly spaced quantiles of ``p_0`` by vectorized bisection (1D only)."""
        self._require_1d()
        q = (np.arange(n) + 0.5) / n
        span = 12 * self.scales.max()
        lo = np.full(n, self.means.min() - span)
        hi = np.full(n, self.means.max() + span)
        while np.max(hi - lo) > tol:
            mid = 0.5 * (lo + hi)
            below = self.cdf(mid, 0.0, y) < q
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        return 0.5 * (lo + hi)

    def data_moments(self, y=None):
        if y is not None:
            return self.component(y).data_moments()
        w = self.weights.reshape((-1,) + (1,) * len(self.shape))
        mean = (w * self.means).sum(axis=0)
        second = (w * (self.means**2 + (self.scales**2).reshape(w.shape))).sum(axis=0)
        return mean, second - mean**2

    def _require_1d(self):
        if self.shape != (1,):
            raise ShapeError("only defined for 1D mixtures")


def power_law_spectrum(shape, gamma=1.5):
    """Per-frequency standard deviations ``(1 + u**2 + v**2) ** (-gamma / 2)``."""
    c, h, w = shape
    u = np.arange(h)[:, None]
    v = np.arange(w)[None, :]
    s = (1.0 + u**2 + v**2) ** (-gamma / 2.0)
    return np.broadcast_to(s, (c, h, w)).copy()


class DctFieldOracle:
    """Zero-mean Gaussian image prior that is diagonal in the orthonormal DCT basis."""

    def __init__(self, shape, gamma=1.5, spectrum=None):
        shape = tuple(int(s) for s in shape)
        if len(shape) != 3 or min(shape) < 1:
            raise ConfigError(f"image shape must be (C, H, W) with positive sizes, got {shape}")
        self.shape = shape
        self.gamma = gamma
        if spectrum is None:
            spectrum = power_law_spectrum(shape, gamma)
        spectrum = np.broadcast_to(np.asarray(spectrum, dtype=np.float64), shape).copy()
        if np.any(spectrum <= 0):
            raise ConfigError("spectrum entries must be positive")
        self.spectrum = spectrum

    def __call__(self, z, t, y=None):
        return self.denoise(z, t, y)

    def shrinkage(self, t):
        s2 = self.spectrum**2
        return s2 / (s2 + t * t)

    def denoise(self, z, t, y=None):
        t = check_time(t)
        z = _check_batch(z, self.shape)
        return idct2(self.shrinkage(t) * dct2(z))

    def exact_trajectory(self, z, t_from, t_to):
        if t_to > t_from:
            raise DomainError(f"t_to={t_to} must not exceed t_from={t_from}")
        s2 = self.spectrum**2
        return idct2(dct2(z) * np.sqrt((s2 + t_to**2) / (s2 + t_from**2)))

    def pixel_covariance(self, channel=0):
        """Dense ``(H*W, H*W)`` covariance of one channel in the pixel basis."""
        _, h, w = self.shape
        basis = np.kron(dct_matrix(h), dct_matrix(w))  # rows: flattened 2D basis images
        lam = self.spectrum[channel].ravel() ** 2
        return basis.T @ (lam[:, None] * basis)

    def data_moments(self):
        _, h, w = self.shape
        ch, cw = dct_matrix(h), dct_matrix(w)
        # Var[x[i, j]] = sum_{u,v} S^2[u, v] C_h[u, i]^2 C_w[v, j]^2
        var = np.einsum("cuv,ui,vj->cij", self.spectrum**2, ch**2, cw**2)
        return np.zeros(self.shape), var
