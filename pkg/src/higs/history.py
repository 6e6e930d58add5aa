"""History-guided sampling: prediction history, projection, weight schedule.

:class:`HiGSGuidance` holds the hyper-parameters (sklearn ``get_params`` /
``set_params`` apply).  Per-trajectory state lives in a :class:`HistoryBuffer`
obtained from :meth:`HiGSGuidance.new_buffer`; :func:`higs_step` consumes one
prediction and returns the additive correction.
"""

import numbers
import warnings
from collections import deque

import numpy as np
from sklearn.base import BaseEstimator

from ._validation import check_option, check_scalar
from .exceptions import EmptyBufferError, ShapeError
from .transform import FreqMask, filter_update, filter_update_1d

HISTORY_KINDS = ("ema", "window-mean", "last")
SCHEDULES = ("sqrt", "linear", "constant")
_DEGENERATE_NORM = 1e-12


class DegenerateProjectionWarning(RuntimeWarning):
    pass


class HistoryBuffer:
    """Running summary of past predictions.

    ``ema`` keeps ``ema <- alpha * pred + (1 - alpha) * ema`` starting from
    zeros, so after ``k`` insertions the weights sum to ``1 - (1 - alpha)**k``
    rather than 1.  ``normalize=True`` divides that factor back out.
    ``window-mean`` averages the last ``window`` entries (all of them when
    ``window`` is None) and ``last`` returns the most recent one.
    """

    def __init__(self, kind="ema", alpha=0.75, window=None, normalize=False):
        self.kind = check_option(kind, "g_kind", HISTORY_KINDS)
        self.alpha = alpha
        self.window = window
        self.normalize = normalize
        self.count = 0
        self.ema = None
        maxlen = 1 if kind == "last" else window
        self._entries = deque(maxlen=maxlen)

    def __len__(self):
        return self.count

    @property
    def is_empty(self):
        return self.count == 0

    @property
    def shape(self):
        if self.kind == "ema":
            return None if self.ema is None else self.ema.shape
        return self._entries[-1].shape if self._entries else None

    def add(self, pred):
        pred = np.asarray(pred, dtype=np.float64)
        if self.shape is not None and pred.shape != self.shape:
            raise ShapeError(f"prediction shape {pred.shape} does not match history {self.shape}")
        if self.kind == "ema":
            if self.ema is None:
                self.ema = np.zeros_like(pred)
            self.ema = self.alpha * pred + (1 - self.alpha) * self.ema
        else:
            self._entries.append(pred.copy())
        self.count += 1

    def mean(self):
        if self.is_empty:
            raise EmptyBufferError("history buffer is empty")
        if self.kind == "ema":
            if self.normalize:
                return self.ema / (1.0 - (1.0 - self.alpha) ** self.count)
            return self.ema
        if self.kind == "last":
            return self._entries[-1]
        return np.mean(np.stack(self._entries), axis=0)

    def reset(self):
        self.count = 0
        self.ema = None
        self._entries.clear()


def history_mean(buf):
    """Current value of the history function ``g`` for ``buf``."""
    return buf.mean()


def _sample_axes(x):
    return tuple(range(1, x.ndim)) if x.ndim >= 2 else (0,)


def project(delta, pred, eta=1.0):
    """Down-weight the component of ``delta`` parallel to ``pred``.

    Returns ``delta_orth + eta * delta_par``.  Arrays with ``ndim >= 2`` are
    treated as batches and projected per sample over all non-leading axes.
    Samples whose prediction norm is below 1e-12 are returned unchanged.
    """
    delta = np.asarray(delta, dtype=np.float64)
    pred = np.asarray(pred, dtype=np.float64)
    if delta.shape != pred.shape:
        raise ShapeError(f"delta shape {delta.shape} != pred shape {pred.shape}")
    axes = _sample_axes(pred)
    pp = np.sum(pred * pred, axis=axes, keepdims=True)
    dp = np.sum(delta * pred, axis=axes, keepdims=True)
    degenerate = np.sqrt(pp) < _DEGENERATE_NORM
    if np.any(degenerate):
        warnings.warn("prediction norm ~ 0; skipping projection for affected samples",
                      DegenerateProjectionWarning, stacklevel=2)
    coef = np.divide(dp, pp, out=np.zeros_like(dp), where=~degenerate)
    par = coef * pred
    orth = delta - par
    out = orth + eta * par
    if np.any(degenerate):
        out = np.where(degenerate, delta, out)
    return out


class HiGSGuidance(BaseEstimator):
    """Hyper-parameters of the history-guided correction.

    Parameters
    ----------
    w_higs : float, default=1.0
        Peak guidance weight; 0 disables the correction.
    t_min, t_max : float, default=0.4, 1.0
        Normalized-time window; the weight is zero for ``t <= t_min`` and
        ``t > t_max``.
    eta : float, default=1.0
        Weight kept on the component of the update parallel to the prediction.
    alpha : float, default=0.75
        EMA coefficient.
    rc : float, default=0.05
        Radius of the high-pass transition in normalized DCT frequency.
    sharpness : float, default=50.0
        Slope of the sigmoid high-pass mask.
    schedule : {"sqrt", "linear", "constant"}, default="sqrt"
    g_kind : {"ema", "window-mean", "last"}, default="ema"
    window : int or None, default=None
        Window length for ``window-mean``; None keeps every prediction.
    filter_enabled : bool, default=True
        Apply the DCT high-pass filter to image-shaped updates.
    projection_enabled : bool, default=True
    buffer_input : {"guided", "conditional"}, default="guided"
        Which prediction stream is recorded when CFG is active.
    normalize_ema : bool, default=False
        Renormalize early EMA weights to sum to one.
    filter_1d : bool, default=False
        Also filter vector states with a 1D DCT (radius ``u / N``).
    """

    def __init__(self, w_higs=1.0, t_min=0.4, t_max=1.0, eta=1.0, alpha=0.75, rc=0.05,
                 sharpness=50.0, schedule="sqrt", g_kind="ema", window=None,
                 filter_enabled=True, projection_enabled=True, buffer_input="guided",
                 normalize_ema=False, filter_1d=False):
        self.w_higs = w_higs
        self.t_min = t_min
        self.t_max = t_max
        self.eta = eta
        self.alpha = alpha
        self.rc = rc
        self.sharpness = sharpness
        self.schedule = schedule
        self.g_kind = g_kind
        self.window = window
        self.filter_enabled = filter_enabled
        self.projection_enabled = projection_enabled
        self.buffer_input = buffer_input
        self.normalize_ema = normalize_ema
        self.filter_1d = filter_1d

    def validate(self):
        check_scalar(self.w_higs, "w_higs", numbers.Real, min_val=0.0)
        check_scalar(self.t_min, "t_min", numbers.Real, min_val=0.0, max_val=1.0)
        check_scalar(self.t_max, "t_max", numbers.Real, min_val=self.t_min, max_val=1.0,
                     include_boundaries="right")
        check_scalar(self.eta, "eta", numbers.Real, min_val=0.0, max_val=1.0)
        check_scalar(self.alpha, "alpha", numbers.Real, min_val=0.0, max_val=1.0,
                     include_boundaries="neither")
        check_scalar(self.rc, "rc", numbers.Real)
        check_scalar(self.sharpness, "sharpness", numbers.Real, min_val=0.0,
                     include_boundaries="neither")
        check_option(self.schedule, "schedule", SCHEDULES)
        check_option(self.g_kind, "g_kind", HISTORY_KINDS)
        if self.window is not None:
            check_scalar(self.window, "window", numbers.Integral, min_val=1)
        for name in ("filter_enabled", "projection_enabled", "normalize_ema", "filter_1d"):
            check_scalar(getattr(self, name), name, bool)
        check_option(self.buffer_input, "buffer_input", ("guided", "conditional"))
        return self

    @property
    def mask(self):
        return FreqMask(self.rc, self.sharpness)

    def new_buffer(self):
        return HistoryBuffer(self.g_kind, self.alpha, self.window, self.normalize_ema)

    def weight(self, t):
        return schedule_weight(t, self)

    def step(self, pred, t, buf):
        return higs_step(pred, t, self, buf)


def schedule_weight(t, cfg):
    """Guidance weight at normalized time ``t``.

    Zero for ``t <= t_min`` and ``t > t_max``; inside the window it ramps
    with ``r = (t - t_min) / (t_max - t_min)`` as ``sqrt(r)``, ``r`` or 1.
    """
    if t > cfg.t_max or t <= cfg.t_min:
        return 0.0
    r = (t - cfg.t_min) / (cfg.t_max - cfg.t_min)
    if cfg.schedule == "sqrt":
        return cfg.w_higs * r**0.5
    if cfg.schedule == "linear":
        return cfg.w_higs * r
    if cfg.schedule == "constant":
        return float(cfg.w_higs)
    check_option(cfg.schedule, "schedule", SCHEDULES)


def higs_step(pred, t, cfg, buf):
    """Correction to add to ``pred`` at normalized time ``t``; updates ``buf``.

    The first call only records ``pred`` and returns zeros.  Afterwards the
    difference to the history is projected, the buffer is updated, and the
    difference is high-pass filtered (images only) and scaled.
    """
    pred = np.asarray(pred, dtype=np.float64)
    if buf.is_empty:
        buf.add(pred)
        return np.zeros_like(pred)
    if buf.shape != pred.shape:
        raise ShapeError(f"prediction shape {pred.shape} does not match history {buf.shape}")

    delta = pred - buf.mean()
    if cfg.projection_enabled:
        delta = project(delta, pred, cfg.eta)
    scale = schedule_weight(t, cfg)
    buf.add(pred)

    if cfg.filter_enabled:
        if pred.ndim >= 3:
            delta = filter_update(delta, cfg.mask)
        elif cfg.filter_1d:
            delta = filter_update_1d(delta, cfg.mask)
    return scale * delta
