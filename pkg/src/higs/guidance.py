"""Classifier-free guidance and choice of the history input stream."""

import numpy as np

from ._validation import check_option, check_same_shape

BUFFER_INPUTS = ("guided", "conditional")


def cfg_combine(cond, uncond, w):
    """Guided prediction ``w * cond - (w - 1) * uncond``; ``w = 1`` returns ``cond``."""
    check_same_shape(cond, uncond, ("cond", "uncond"))
    if w == 1:
        return np.array(cond, dtype=np.float64, copy=True)
    return w * np.asarray(cond) - (w - 1) * np.asarray(uncond)


def select_buffer_input(cond, guided, mode="guided", cfg_enabled=True):
    """Prediction stream fed to the history buffer.

    Without CFG only the conditional stream exists, so ``mode`` is ignored.
    """
    check_option(mode, "buffer_input", BUFFER_INPUTS)
    if not cfg_enabled or mode == "conditional":
        return cond
    return guided


def guided_prediction(denoiser, z, t, label=None, w_cfg=1.0):
    """Evaluate the denoiser with optional CFG; returns ``(cond, guided)``.

    With ``w_cfg == 1`` the unconditional branch is never evaluated and
    ``guided`` is the conditional prediction itself.
    """
    cond = denoiser(z, t, label)
    if w_cfg == 1:
        return cond, cond
    uncond = denoiser(z, t, None)
    return cond, cfg_combine(cond, uncond, w_cfg)
