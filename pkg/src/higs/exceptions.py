"""Exception types raised by the sampling library."""


class ConfigError(ValueError):
    """Invalid configuration value or combination."""


class ShapeError(ValueError):
    """Array shape does not match what the operation expects."""


class DomainError(ValueError):
    """Argument outside the mathematical domain (e.g. t <= 0)."""


class EmptyBufferError(LookupError):
    """History buffer queried before any prediction was inserted."""


class FitError(ValueError):
    """Not enough usable points to fit a convergence order."""


class DivergenceError(FloatingPointError):
    """Sampler state became non-finite."""

    def __init__(self, step, message=None):
        self.step = step
        super().__init__(message or f"non-finite state at step {step}")
