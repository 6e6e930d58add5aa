"""Time grids and denoiser/score conversions for the sigma(t) = t diffusion.

States are float64 arrays.  A single state is ``(d,)`` or ``(C, H, W)``;
samplers carry a leading batch axis.  A denoiser is any callable
``D(z, t, y=None)`` returning an array shaped like ``z``.
"""

import numbers
from dataclasses import dataclass

import numpy as np

from ._validation import check_scalar, check_time
from .exceptions import ConfigError

DEFAULT_T_FLOOR = 0.002


@dataclass(frozen=True)
class TimeGrid:
    """Strictly decreasing sampling times ``t_0 > ... > t_M``."""

    times: tuple

    def __post_init__(self):
        t = np.asarray(self.times, dtype=np.float64)
        if t.ndim != 1 or t.size < 2:
            raise ConfigError("a time grid needs at least two points")
        if not np.all(np.diff(t) < 0):
            raise ConfigError("grid times must be strictly decreasing")
        if t[-1] <= 0.0 or t[0] > 1.0:
            raise ConfigError("grid times must lie in (0, 1]")
        object.__setattr__(self, "times", tuple(float(x) for x in t))

    @property
    def steps(self):
        """Step sizes ``h_k = t_k - t_{k+1}``."""
        t = np.asarray(self.times)
        return t[:-1] - t[1:]

    @property
    def n_steps(self):
        return len(self.times) - 1

    @property
    def h_max(self):
        return float(self.steps.max())

    def __len__(self):
        return len(self.times)

    def __iter__(self):
        return iter(self.times)

    def __getitem__(self, i):
        return self.times[i]


def build_time_grid(kind="uniform", n_steps=32, t_floor=DEFAULT_T_FLOOR, rho=7.0):
    """Build a grid from ``t_0 = 1`` down to ``t_M = t_floor``.

    ``uniform`` spaces times linearly; ``power-rho`` interpolates linearly in
    ``t**(1/rho)`` so steps cluster near ``t_floor``.
    """
    check_scalar(n_steps, "n_steps", numbers.Integral, min_val=1)
    check_scalar(t_floor, "t_floor", numbers.Real, min_val=0.0, max_val=1.0,
                 include_boundaries="neither")
    i = np.arange(n_steps + 1, dtype=np.float64)
    if kind == "uniform":
        t = 1.0 - i * (1.0 - t_floor) / n_steps
    elif kind == "power-rho":
        check_scalar(rho, "rho", numbers.Real, min_val=0.0, include_boundaries="neither")
        inv = 1.0 / rho
        t = (1.0 + (i / n_steps) * (t_floor ** inv - 1.0)) ** rho
    else:
        raise ConfigError(f"unknown grid kind {kind!r}; expected 'uniform' or 'power-rho'")
    # pin endpoints against rounding in the power form
    t[0], t[-1] = 1.0, float(t_floor)
    return TimeGrid(tuple(t))


def score_from_denoiser(denoised, z, t):
    """Score ``grad log p_t(z) = (D(z, t) - z) / t**2``."""
    t = check_time(t)
    return (np.asarray(denoised, dtype=np.float64) - z) / (t * t)


def denoiser_from_score(score, z, t):
    """Inverse of :func:`score_from_denoiser`: ``D = z + t**2 * score``."""
    t = check_time(t)
    return np.asarray(z, dtype=np.float64) + (t * t) * np.asarray(score)


def drift_from_prediction(pred, z, t):
    """ODE drift ``u = (pred - z) / t`` for an already-computed prediction."""
    t = check_time(t)
    return (pred - z) / t


def drift(z, t, denoiser, y=None):
    """Drift ``u(z, t) = t * score`` such that an Euler step is ``z + h * u``."""
    t = check_time(t)
    return drift_from_prediction(denoiser(z, t, y), z, t)
