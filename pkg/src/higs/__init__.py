"""History-guided sampling for diffusion ODE samplers, with analytic test oracles."""

__version__ = "0.1.0"

from .core import TimeGrid, build_time_grid, denoiser_from_score, drift, score_from_denoiser
from .exceptions import (ConfigError, DivergenceError, DomainError, EmptyBufferError,
                         FitError, ShapeError)
from .guidance import cfg_combine, select_buffer_input
from .history import HiGSGuidance, HistoryBuffer, higs_step, history_mean, project, schedule_weight
from .metrics import OrderFit, fit_order, moment_error, w1_1d
from .oracles import DctFieldOracle, GaussianOracle, MixtureOracle
from .solvers import (DiffusionSampler, SamplerOutput, euler_higs_sample,
                      euler_history_theory_sample, euler_sample, heun_sample, initial_noise)
from .transform import FreqMask, HighPassDCTFilter, dct2, filter_update, highpass_mask, idct2

__all__ = [
    "TimeGrid", "build_time_grid", "denoiser_from_score", "drift", "score_from_denoiser",
    "ConfigError", "DivergenceError", "DomainError", "EmptyBufferError", "FitError",
    "ShapeError", "cfg_combine", "select_buffer_input", "HiGSGuidance", "HistoryBuffer",
    "higs_step", "history_mean", "project", "schedule_weight", "OrderFit", "fit_order",
    "moment_error", "w1_1d", "DctFieldOracle", "GaussianOracle", "MixtureOracle",
    "DiffusionSampler", "SamplerOutput", "euler_higs_sample", "euler_history_theory_sample",
    "euler_sample", "heun_sample", "initial_noise", "FreqMask", "HighPassDCTFilter", "dct2",
    "filter_update", "highpass_mask", "idct2",
]
