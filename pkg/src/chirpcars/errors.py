"""Exception hierarchy shared across the package.

The CLI maps these onto process exit codes: configuration problems exit 2,
numerical singularities / integration failures exit 3, I/O failures exit 4.
"""

from __future__ import annotations

__all__ = [
    "ChirpcarsError",
    "ConfigurationError",
    "SingularDenominatorError",
    "IntegrationError",
    "SamplingError",
    "ExtractionError",
]


class ChirpcarsError(Exception):
    """Base class for all package-specific errors."""


class ConfigurationError(ChirpcarsError):
    """Invalid configuration or parameter set.

    ``field_path`` locates the offending entry (dotted path) when the error
    originates from a config file.
    """

    def __init__(self, message: str, field_path: str | None = None):
        self.field_path = field_path
        if field_path:
            message = f"{field_path}: {message}"
        super().__init__(message)


class SingularDenominatorError(ChirpcarsError):
    """A detuning denominator fell below the divergence guard.

    The offending time (internal units) is carried so the diagnostic can name
    where the configuration drives the equations singular.
    """

    def __init__(self, message: str, time: float):
        self.time = time
        super().__init__(f"{message} (at t = {time:.6g})")


class IntegrationError(ChirpcarsError):
    """A density-matrix invariant was violated beyond tolerance mid-run."""

    def __init__(self, message: str, step: int, quantity: str, value: float):
        self.step = step
        self.quantity = quantity
        self.value = value
        super().__init__(
            f"{message}: {quantity} = {value:.3e} at step {step}"
        )


class SamplingError(ChirpcarsError):
    """Input samples are too coarse for the requested analysis."""


class ExtractionError(ChirpcarsError):
    """Phase recovery failed (degenerate window or fit)."""
