"""Deterministic samplers for the probability-flow ODE ``dz = -u(z, t) dt``.

Every solver walks a :class:`~higs.core.TimeGrid` from ``t_0`` down to
``t_M = t_floor`` and returns the denoised prediction at ``t_M`` as the sample.
States are batched: ``z0`` has shape ``(B, *state_shape)``.
"""

import numbers
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator

from ._validation import check_option, check_scalar, check_state
from .core import DEFAULT_T_FLOOR, build_time_grid
from .exceptions import ConfigError, DivergenceError
from .guidance import guided_prediction, select_buffer_input

SOLVER_KINDS = ("euler", "heun", "euler_higs", "euler_history_theory")


@dataclass
class SamplerOutput:
    samples: np.ndarray
    state: np.ndarray
    nfe: int
    trace: list = field(default=None, repr=False)


def _check_finite(z, step):
    if not np.all(np.isfinite(z)):
        raise DivergenceError(step)


def _physical_times(grid, sigma_max):
    return [sigma_max * t for t in grid]


def _finish(denoiser, z, times, label, w_cfg, nfe, trace):
    t_last = times[-1]
    _, final = guided_prediction(denoiser, z, t_last, label, w_cfg)
    nfe += 1 if w_cfg == 1 else 2
    _check_finite(final, len(times) - 1)
    if trace is not None:
        trace.append((t_last, z.copy(), final.copy()))
    return SamplerOutput(samples=final, state=z, nfe=nfe, trace=trace)


def _euler_loop(denoiser, z0, grid, label, w_cfg, higs, trace, sigma_max):
    z = check_state(z0, "z0")
    records = [] if trace else None
    evals = 1 if w_cfg == 1 else 2
    buf = higs.new_buffer() if higs is not None else None
    times = _physical_times(grid, sigma_max)
    t0 = times[0]
    nfe = 0
    for k in range(grid.n_steps):
        t, t_next = times[k], times[k + 1]
        cond, pred = guided_prediction(denoiser, z, t, label, w_cfg)
        nfe += evals
        if higs is not None:
            stream = select_buffer_input(cond, pred, higs.buffer_input, cfg_enabled=w_cfg != 1)
            pred = pred + higs.step(stream, t / t0, buf)
        if records is not None:
            records.append((t, z.copy(), pred.copy()))
        u = (pred - z) / t
        z = z + (t - t_next) * u
        _check_finite(z, k)
    return _finish(denoiser, z, times, label, w_cfg, nfe, records)


def euler_sample(denoiser, z0, grid, label=None, w_cfg=1.0, trace=False, sigma_max=1.0):
    """Explicit Euler: ``z_{k+1} = z_k + h_k * u(z_k, t_k)``.

    ``sigma_max`` scales the normalized grid to physical noise levels.
    """
    return _euler_loop(denoiser, z0, grid, label, w_cfg, None, trace, sigma_max)


def euler_higs_sample(denoiser, z0, grid, higs, label=None, w_cfg=1.0, trace=False,
                      sigma_max=1.0):
    """Euler with the history-guided correction added to each prediction.

    Times passed to the guidance are normalized by ``t_0``.  The buffer is
    batched; EMA and projection act per sample, so this is equivalent to one
    buffer per trajectory.
    """
    if higs is None:
        raise ConfigError("euler_higs requires a HiGSGuidance configuration")
    higs.validate()
    return _euler_loop(denoiser, z0, grid, label, w_cfg, higs, trace, sigma_max)


def euler_history_theory_sample(denoiser, z0, grid, label=None, w_cfg=1.0, trace=False,
                                sigma_max=1.0):
    """Euler with a drift-space history term of weight ``h_k / (2 h_{k-1})``.

    ``u~_k = u_k + w_k (u_k - u_{k-1})``; this cancels the leading local
    error term and makes the method second order.  Step 0 is plain Euler.
    """
    if grid.n_steps < 2:
        raise ConfigError("euler_history_theory needs at least 2 steps")
    z = check_state(z0, "z0")
    records = [] if trace else None
    evals = 1 if w_cfg == 1 else 2
    times = _physical_times(grid, sigma_max)
    h = [times[k] - times[k + 1] for k in range(grid.n_steps)]
    u_prev = None
    nfe = 0
    for k in range(grid.n_steps):
        t = times[k]
        _, pred = guided_prediction(denoiser, z, t, label, w_cfg)
        nfe += evals
        if records is not None:
            records.append((t, z.copy(), pred.copy()))
        u = (pred - z) / t
        if u_prev is None:
            u_step = u
        else:
            u_step = u + (h[k] / (2.0 * h[k - 1])) * (u - u_prev)
        z = z + h[k] * u_step
        _check_finite(z, k)
        u_prev = u
    return _finish(denoiser, z, times, label, w_cfg, nfe, records)


def heun_sample(denoiser, z0, grid, label=None, w_cfg=1.0, trace=False, sigma_max=1.0):
    """Heun predictor-corrector (trapezoidal average of the two drifts)."""
    z = check_state(z0, "z0")
    records = [] if trace else None
    evals = 1 if w_cfg == 1 else 2
    times = _physical_times(grid, sigma_max)
    nfe = 0
    for k in range(grid.n_steps):
        t, t_next = times[k], times[k + 1]
        h = t - t_next
        _, pred = guided_prediction(denoiser, z, t, label, w_cfg)
        if records is not None:
            records.append((t, z.copy(), pred.copy()))
        u0 = (pred - z) / t
        z_pred = z + h * u0
        _, pred_next = guided_prediction(denoiser, z_pred, t_next, label, w_cfg)
        u1 = (pred_next - z_pred) / t_next
        nfe += 2 * evals
        z = z + h * 0.5 * (u0 + u1)
        _check_finite(z, k)
    return _finish(denoiser, z, times, label, w_cfg, nfe, records)


def initial_noise(shape, batch_size, seed=0, t0=1.0):
    """Draw ``z_{t_0} ~ N(0, t0**2 I)``; element ``i`` uses its own stream keyed by ``(seed, i)``."""
    out = np.empty((batch_size,) + tuple(shape))
    for i in range(batch_size):
        out[i] = np.random.default_rng([seed, i]).standard_normal(shape)
    return t0 * out


class DiffusionSampler(BaseEstimator):
    """Configured ODE sampler; draws a batch from any denoiser.

    Parameters
    ----------
    solver : {"euler", "heun", "euler_higs", "euler_history_theory"}
    n_steps : int, default=32
    grid : {"uniform", "power-rho"}, default="uniform"
    t_floor : float, default=0.002
    rho : float, default=7.0
        Exponent of the ``power-rho`` grid.
    sigma_max : float, default=1.0
        Physical noise level at ``t_0``; the denoiser sees ``sigma_max * t``
        while the guidance schedule sees normalized ``t``.
    w_cfg : float, default=1.0
        Classifier-free guidance scale; 1 disables guidance.
    label : int or None
        Condition passed to the denoiser.
    higs : HiGSGuidance or None
        Required for ``solver="euler_higs"``.
    batch_size : int, default=64
    seed : int, default=0
    trace : bool, default=False
        Record ``(t_k, z_k, pred_k)`` at every step.

    Examples
    --------
    >>> from higs.oracles import GaussianOracle
    >>> out = DiffusionSampler(n_steps=8, batch_size=4).sample(GaussianOracle([0.0]))
    >>> out.samples.shape
    (4, 1)
    """

    def __init__(self, solver="euler", n_steps=32, grid="uniform", t_floor=DEFAULT_T_FLOOR,
                 rho=7.0, sigma_max=1.0, w_cfg=1.0, label=None, higs=None, batch_size=64,
                 seed=0, trace=False):
        self.solver = solver
        self.n_steps = n_steps
        self.grid = grid
        self.t_floor = t_floor
        self.rho = rho
        self.sigma_max = sigma_max
        self.w_cfg = w_cfg
        self.label = label
        self.higs = higs
        self.batch_size = batch_size
        self.seed = seed
        self.trace = trace

    def validate(self):
        check_option(self.solver, "solver", SOLVER_KINDS)
        check_scalar(self.w_cfg, "w_cfg", numbers.Real, min_val=1.0)
        check_scalar(self.sigma_max, "sigma_max", numbers.Real, min_val=0.0,
                     include_boundaries="neither")
        check_scalar(self.batch_size, "batch_size", numbers.Integral, min_val=1)
        check_scalar(self.seed, "seed", numbers.Integral, min_val=0)
        if self.solver == "euler_higs":
            if self.higs is None:
                raise ConfigError("solver 'euler_higs' requires higs settings")
            self.higs.validate()
        if self.solver == "euler_history_theory" and self.n_steps < 2:
            raise ConfigError("euler_history_theory needs n_steps >= 2")
        self.time_grid()
        return self

    def time_grid(self):
        return build_time_grid(self.grid, self.n_steps, self.t_floor, self.rho)

    def initial_noise(self, shape):
        return initial_noise(shape, self.batch_size, self.seed, self.sigma_max)

    def sample(self, denoiser, z0=None):
        """Integrate from ``z0`` (drawn from the seed if omitted) to ``t_floor``."""
        self.validate()
        grid = self.time_grid()
        if z0 is None:
            z0 = self.initial_noise(denoiser.shape)
        kw = dict(label=self.label, w_cfg=self.w_cfg, trace=self.trace,
                  sigma_max=self.sigma_max)
        if self.solver == "euler":
            return euler_sample(denoiser, z0, grid, **kw)
        if self.solver == "euler_higs":
            return euler_higs_sample(denoiser, z0, grid, self.higs, **kw)
        if self.solver == "euler_history_theory":
            return euler_history_theory_sample(denoiser, z0, grid, **kw)
        return heun_sample(denoiser, z0, grid, **kw)
