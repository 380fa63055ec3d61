"""Coherent control of Raman coherence with chirped pulse trains.

Simulation toolkit for two-, three- and four-level density-matrix dynamics
driven by chirped Gaussian pulse trains, multilayer propagation of the four
Raman field envelopes through a Gaussian-density medium, Wigner-Ville
time-frequency maps, and deterministic extraction of chirp parameters from
sampled fields.  The ``sim`` console script exposes the run/scan/compare/
propagate/wigner/phasefit entry points.
"""

from .errors import (
    ChirpcarsError,
    ConfigurationError,
    IntegrationError,
    SamplingError,
    SingularDenominatorError,
)
from .pulses import ChirpedPulse, EffectiveRabi, FStirapEnvelopePair, PulseTrain

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "ChirpcarsError",
    "ConfigurationError",
    "IntegrationError",
    "SamplingError",
    "SingularDenominatorError",
    "ChirpedPulse",
    "PulseTrain",
    "EffectiveRabi",
    "FStirapEnvelopePair",
]
