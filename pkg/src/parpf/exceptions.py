"""Exception types shared across the package.

Argument validation failures raise plain :class:`ValueError`; the classes
here cover runtime conditions that callers may want to catch and handle
separately (weight collapse, model divergence, bad configuration).
"""


class WeightCollapseError(RuntimeError):
    """Every raw importance weight underflowed to zero.

    Estimates at the offending step are invalid.  Filter drivers catch this,
    reset the weights to uniform and record the step index so that long
    sweeps keep running with the event flagged.
    """

    def __init__(self, message: str = "all importance weights are -inf"):
        super().__init__(message)


class UnsupportedModelError(TypeError):
    """The model lacks a hook required by the requested algorithm."""


class NumericalDivergenceError(FloatingPointError):
    """A model transition produced non-finite state values."""


class ConfigError(ValueError):
    """An experiment configuration is inconsistent or incomplete."""
