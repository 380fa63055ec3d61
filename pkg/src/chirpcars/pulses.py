"""Chirped Gaussian pulses, pulse trains, and piecewise chirp laws.

A linearly chirped Gaussian field component is

    E(t) = E0 (1 + a'^2/tau0^4)^(-1/4) exp(-(t-tc)^2 / (2 tau^2))
           * cos[w (t-tc) + (alpha/2)(t-tc)^2],

where ``a'`` is the spectral chirp (time^2 units), ``tau0`` the
transform-limited duration, and the stretched duration and temporal chirp
follow

    tau   = tau0 sqrt(1 + a'^2/tau0^4),
    alpha = (a'/tau0^4) / (1 + a'^2/tau0^4).

These two satisfy ``alpha * tau^2 * tau0^2 == a'`` exactly, which the tests
assert as the round-trip identity.  The control scheme flips the pump chirp
sign at the pulse center: pump rate -a_s -> +a_s across tc, probe rate
2 a_s -> 0, Stokes rate a_s throughout, so the pump-Stokes rate difference
vanishes for t > tc.  All chirp laws evaluate on time *relative to the pulse
center* and use the closed-left convention (t <= tc belongs to the first
branch).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ChirpLaw",
    "ConstantChirp",
    "CCarsPumpChirp",
    "CCarsStokesChirp",
    "CCarsProbeChirp",
    "RoofChirp",
    "ChirpedPulse",
    "PulseTrain",
    "FStirapEnvelopePair",
    "EffectiveRabi",
    "spectral_to_temporal_chirp",
    "temporal_to_spectral_chirp",
    "chirped_duration",
    "envelope_at",
    "instantaneous_phase",
    "effective_rabi",
    "train_field",
    "f_stirap_envelopes",
]


def spectral_to_temporal_chirp(alpha_prime: float, tau0: float) -> float:
    """Temporal chirp rate for a given spectral chirp.

    Parameters
    ----------
    alpha_prime : float
        Spectral chirp a' (inverse-frequency-squared units).
    tau0 : float
        Transform-limited duration, > 0.
    """
    if tau0 <= 0.0:
        raise ValueError("tau0 must be positive")
    x = alpha_prime / tau0**2
    return (alpha_prime / tau0**4) / (1.0 + x * x)


def temporal_to_spectral_chirp(alpha: float, tau0: float) -> float:
    """Invert :func:`spectral_to_temporal_chirp` (small-|a'| branch).

    The map a' -> alpha is two-to-one; this returns the root with the smaller
    magnitude, i.e. the least-stretched pulse realizing the requested temporal
    rate.  |alpha| may not exceed 1/(2 tau0^2), the maximum the Gaussian
    family supports.
    """
    if tau0 <= 0.0:
        raise ValueError("tau0 must be positive")
    if alpha == 0.0:
        return 0.0
    disc = 1.0 - 4.0 * alpha**2 * tau0**4
    if disc < 0.0:
        raise ValueError(
            f"|temporal chirp| exceeds the attainable maximum 1/(2 tau0^2) = "
            f"{0.5 / tau0**2:.6g}"
        )
    return (1.0 - math.sqrt(disc)) / (2.0 * alpha)


def chirped_duration(alpha_prime: float, tau0: float) -> float:
    """Stretched duration tau = tau0 sqrt(1 + a'^2/tau0^4)."""
    if tau0 <= 0.0:
        raise ValueError("tau0 must be positive")
    x = alpha_prime / tau0**2
    return tau0 * math.sqrt(1.0 + x * x)


class ChirpLaw:
    """Base class: a (possibly piecewise) temporal chirp rate profile.

    Concrete laws implement ``rate(t_rel)``, the instantaneous chirp rate as a
    function of time measured from the pulse center.
    """

    def rate(self, t_rel):
        raise NotImplementedError


@dataclass(frozen=True)
class ConstantChirp(ChirpLaw):
    """Single linear chirp rate over the whole pulse."""

    alpha: float

    def rate(self, t_rel):
        return np.full_like(np.asarray(t_rel, dtype=float), self.alpha)


@dataclass(frozen=True)
class CCarsPumpChirp(ChirpLaw):
    """Pump rate under the control scheme: -a_s before center, +a_s after."""

    alpha_s: float

    def rate(self, t_rel):
        t_rel = np.asarray(t_rel, dtype=float)
        return np.where(t_rel <= 0.0, -self.alpha_s, self.alpha_s)


@dataclass(frozen=True)
class CCarsStokesChirp(ChirpLaw):
    """Stokes rate under the control scheme: a_s throughout."""

    alpha_s: float

    def rate(self, t_rel):
        return np.full_like(np.asarray(t_rel, dtype=float), self.alpha_s)


@dataclass(frozen=True)
class CCarsProbeChirp(ChirpLaw):
    """Probe rate under the control scheme: 2 a_s before center, 0 after."""

    alpha_s: float

    def rate(self, t_rel):
        t_rel = np.asarray(t_rel, dtype=float)
        return np.where(t_rel <= 0.0, 2.0 * self.alpha_s, 0.0)


@dataclass(frozen=True)
class RoofChirp(ChirpLaw):
    """Different linear rates before and after the pulse center."""

    alpha_before: float
    alpha_after: float

    def rate(self, t_rel):
        t_rel = np.asarray(t_rel, dtype=float)
        return np.where(t_rel <= 0.0, self.alpha_before, self.alpha_after)


@dataclass(frozen=True)
class ChirpedPulse:
    """One Gaussian field component.

    Parameters
    ----------
    peak_amplitude : float
        Transform-limited peak Rabi amplitude E0 (>= 0); the realized peak is
        reduced by (1 + a'^2/tau0^4)^(-1/4) when chirped.
    carrier : float
        Carrier frequency w_q (>= 0).
    tau0 : float
        Transform-limited duration (> 0).
    spectral_chirp : float
        Spectral chirp a'; sets the stretched duration and, unless an explicit
        piecewise ``chirp_law`` is supplied, the constant temporal rate.
    center_time : float
        Envelope peak time tc.
    chirp_law : ChirpLaw, optional
        Piecewise rate profile; defaults to the constant rate implied by
        ``spectral_chirp``.
    """

    peak_amplitude: float
    carrier: float
    tau0: float
    spectral_chirp: float = 0.0
    center_time: float = 0.0
    chirp_law: ChirpLaw = None  # type: ignore[assignment]

    def __post_init__(self):
        if self.tau0 <= 0.0:
            raise ValueError("tau0 must be positive")
        if self.peak_amplitude < 0.0:
            raise ValueError("peak_amplitude must be non-negative")
        if self.chirp_law is None:
            alpha = spectral_to_temporal_chirp(self.spectral_chirp, self.tau0)
            object.__setattr__(self, "chirp_law", ConstantChirp(alpha))

    @property
    def duration(self) -> float:
        """Chirp-stretched duration tau."""
        return chirped_duration(self.spectral_chirp, self.tau0)

    @property
    def temporal_chirp(self) -> float:
        """Constant-equivalent temporal rate implied by the spectral chirp."""
        return spectral_to_temporal_chirp(self.spectral_chirp, self.tau0)

    @property
    def amplitude_reduction(self) -> float:
        """Chirp prefactor (1 + a'^2/tau0^4)^(-1/4)."""
        x = self.spectral_chirp / self.tau0**2
        return (1.0 + x * x) ** -0.25

    @property
    def peak_envelope(self) -> float:
        return self.peak_amplitude * self.amplitude_reduction

    def envelope(self, t):
        """Field envelope at time(s) ``t``."""
        t_rel = np.asarray(t, dtype=float) - self.center_time
        tau = self.duration
        return self.peak_envelope * np.exp(-(t_rel**2) / (2.0 * tau * tau))

    def phase(self, t):
        """Accumulated phase w(t-tc) + rate(t-tc)^2/2 per the chirp law."""
        t_rel = np.asarray(t, dtype=float) - self.center_time
        return self.carrier * t_rel + 0.5 * self.chirp_law.rate(t_rel) * t_rel**2

    def instantaneous_frequency(self, t):
        """d(phase)/dt away from the branch point: w + rate * (t-tc)."""
        t_rel = np.asarray(t, dtype=float) - self.center_time
        return self.carrier + self.chirp_law.rate(t_rel) * t_rel

    def field(self, t):
        """Real field: envelope times cos(phase)."""
        return self.envelope(t) * np.cos(self.phase(t))


@dataclass(frozen=True)
class PulseTrain:
    """``count`` copies of ``base`` shifted by multiples of ``period``."""

    base: ChirpedPulse
    period: float = 0.0
    count: int = 1

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("count must be >= 1")
        if self.count > 1 and self.period < 0.0:
            raise ValueError("period must be non-negative")

    def pulse_index(self, t):
        """Index of the nearest pulse center, clipped to [0, count-1]."""
        t = np.asarray(t, dtype=float)
        if self.count == 1 or self.period == 0.0:
            return np.zeros(t.shape, dtype=np.int64)
        k = np.rint((t - self.base.center_time) / self.period)
        return np.clip(k, 0, self.count - 1).astype(np.int64)

    def local_time(self, t):
        """Time relative to the nearest pulse center, t - tc - k T."""
        t = np.asarray(t, dtype=float)
        return t - self.base.center_time - self.pulse_index(t) * self.period

    def envelope(self, t):
        t = np.asarray(t, dtype=float)
        total = np.zeros(t.shape, dtype=float)
        for k in range(self.count):
            total += self.base.envelope(t - k * self.period)
        return total

    def field(self, t):
        t = np.asarray(t, dtype=float)
        total = np.zeros(t.shape, dtype=float)
        for k in range(self.count):
            total += self.base.field(t - k * self.period)
        return total

    def chirp_rate(self, t):
        """Chirp rate evaluated on the per-pulse local time."""
        return self.base.chirp_law.rate(self.local_time(t))

    @property
    def span(self) -> float:
        """Total center-to-center extent (count-1) * period."""
        return (self.count - 1) * self.period


def envelope_at(pulse: ChirpedPulse, t):
    """Module-level alias for :meth:`ChirpedPulse.envelope`."""
    return pulse.envelope(t)


def instantaneous_phase(pulse: ChirpedPulse, t):
    """Module-level alias for :meth:`ChirpedPulse.phase`."""
    return pulse.phase(t)


def train_field(train: PulseTrain, t):
    """Module-level alias for :meth:`PulseTrain.field`."""
    return train.field(t)


@dataclass(frozen=True)
class EffectiveRabi:
    """The two-photon coupling after adiabatic elimination.

    The pump and Stokes envelopes multiply, so the effective coupling is a
    Gaussian with squared width ``1/tau_eff^2 = 1/(2 tau_p^2) + 1/(2 tau_s^2)``
    and peak

        peak = Omega_p0^2 / (4 sqrt(2) Delta)
               * [(1 + a_p'^2/tau0^4)(1 + a_s'^2/tau0^4)]^(-1/4).

    ``value``/``derivative`` are analytic; no finite differences anywhere.
    """

    peak: float
    tau: float
    center_time: float = 0.0

    @classmethod
    def from_pulses(
        cls,
        omega_p_peak: float,
        delta_one_photon: float,
        alpha_p_prime: float,
        alpha_s_prime: float,
        tau0: float,
        center_time: float = 0.0,
    ) -> "EffectiveRabi":
        if delta_one_photon == 0.0:
            raise ValueError(
                "one-photon detuning must be nonzero for adiabatic elimination"
            )
        if tau0 <= 0.0:
            raise ValueError("tau0 must be positive")
        xp = alpha_p_prime / tau0**2
        xs = alpha_s_prime / tau0**2
        reduction = ((1.0 + xp * xp) * (1.0 + xs * xs)) ** -0.25
        peak = omega_p_peak**2 / (4.0 * math.sqrt(2.0) * delta_one_photon)
        tau_p = chirped_duration(alpha_p_prime, tau0)
        tau_s = chirped_duration(alpha_s_prime, tau0)
        tau_eff = math.sqrt(1.0 / (0.5 / tau_p**2 + 0.5 / tau_s**2))
        return cls(peak=peak * reduction, tau=tau_eff, center_time=center_time)

    def value(self, t):
        t_rel = np.asarray(t, dtype=float) - self.center_time
        return self.peak * np.exp(-(t_rel**2) / self.tau**2)

    def derivative(self, t):
        t_rel = np.asarray(t, dtype=float) - self.center_time
        return self.value(t) * (-2.0 * t_rel / self.tau**2)


def effective_rabi(
    omega_p_peak: float,
    delta_one_photon: float,
    alpha_p_prime: float,
    alpha_s_prime: float,
    tau0: float,
    t,
    center_time: float = 0.0,
):
    """Effective two-photon Rabi coupling at time(s) ``t``."""
    coupling = EffectiveRabi.from_pulses(
        omega_p_peak, delta_one_photon, alpha_p_prime, alpha_s_prime, tau0,
        center_time,
    )
    return coupling.value(t)


@dataclass(frozen=True)
class FStirapEnvelopePair:
    """Fractional-STIRAP pump/Stokes envelopes with final mixing angle A.

    The Stokes field is the sum of an early Gaussian centered at -t_p and a
    pump-synchronous one at +t_p scaled by cos A, so the late-time ratio
    pump/Stokes tends to tan A.  These envelopes use exp(-(t -+ t_p)^2/tau^2)
    (no factor 2 in the exponent), following the convention of the passage
    analysis rather than the field-amplitude convention above.
    """

    omega0: float
    mixing: float
    t_p: float
    tau: float

    def __post_init__(self):
        if not 0.0 <= self.mixing <= math.pi / 2.0:
            raise ValueError("mixing angle must lie in [0, pi/2]")
        if self.tau <= 0.0:
            raise ValueError("tau must be positive")

    def pump(self, t):
        t = np.asarray(t, dtype=float)
        return (
            self.omega0
            * math.sin(self.mixing)
            * np.exp(-((t - self.t_p) ** 2) / self.tau**2)
        )

    def stokes(self, t):
        t = np.asarray(t, dtype=float)
        early = np.exp(-((t + self.t_p) ** 2) / self.tau**2)
        late = math.cos(self.mixing) * np.exp(-((t - self.t_p) ** 2) / self.tau**2)
        return self.omega0 * (early + late)

    def mixing_angle(self, t):
        """theta(t) = atan(pump/Stokes), rising from 0 to the constant A."""
        return np.arctan2(self.pump(t), self.stokes(t))


def f_stirap_envelopes(pair: FStirapEnvelopePair, t):
    """(pump, Stokes) envelope values at time(s) ``t``."""
    return pair.pump(t), pair.stokes(t)
