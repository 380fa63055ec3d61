"""Time-dependent Hamiltonians in the field-interaction representation.

All builders accept a scalar time or a 1-D time array and return an (N, N) or
(T, N, N) complex array with hbar = 1.  Rabi envelopes are real and
non-negative, so Hermiticity reduces to symmetry.

The builders cover the systems studied here:

* :func:`h_four_level` — exact four-level Raman system (pump/Stokes couple
  the vibrational pair through state 3, probe/anti-Stokes through state 4),
  diagonal carrying the piecewise chirp terms;
* :func:`h_super_effective` — the 2x2 reduction after adiabatic elimination
  of the excited manifold at large one-photon detuning;
* :func:`h_stirap3` — three-level STIRAP with optional linear chirps on the
  pump/Stokes diagonals;
* :func:`h_fstirap` — the same ladder driven by fractional-STIRAP envelopes;
* :func:`h_stirap4` — STIRAP with a nearly degenerate final doublet, the
  Stokes envelope coupling the intermediate state to both members.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError
from .pulses import (
    CCarsProbeChirp,
    CCarsPumpChirp,
    CCarsStokesChirp,
    ChirpedPulse,
    ChirpLaw,
    ConstantChirp,
    EffectiveRabi,
    FStirapEnvelopePair,
    PulseTrain,
    spectral_to_temporal_chirp,
)

__all__ = [
    "FourLevelCarsParams",
    "SuperEffectiveParams",
    "StirapParams",
    "ChirpedStirap4Params",
    "h_four_level",
    "h_super_effective",
    "h_stirap3",
    "h_stirap4",
    "h_fstirap",
    "ac_stark_balance",
    "stark_imbalance",
]

#: Default carrier frequencies (pump, Stokes, probe, anti-Stokes) used when a
#: scheme constructor is not given explicit values.  They satisfy energy
#: conservation w_as = w_p - w_s + w_pr and keep every one-photon denominator
#: comfortably away from zero for the detunings used in the propagation runs.
DEFAULT_CARRIERS = (4.0, 3.0, 4.0, 5.0)


def _as_time_array(t):
    """Return (t as 1-D float array, had_scalar_shape flag)."""
    t = np.asarray(t, dtype=float)
    scalar = t.ndim == 0
    return np.atleast_1d(t), scalar


@dataclass(frozen=True)
class FourLevelCarsParams:
    """Exact four-level CARS system parameters.

    The four trains must share center time, period and count; the anti-Stokes
    amplitude must start at zero; and the probe chirp law must equal
    Stokes - pump at all times (the condition used to derive the reduced
    dynamics).  Violations raise :class:`ConfigurationError`.
    """

    pump: PulseTrain
    stokes: PulseTrain
    probe: PulseTrain
    antistokes: PulseTrain
    delta_s: float
    delta_as: float
    two_photon_delta: float = 0.0

    def __post_init__(self):
        trains = (self.pump, self.stokes, self.probe, self.antistokes)
        base = trains[0]
        for name, train in zip(("stokes", "probe", "antistokes"), trains[1:]):
            if (
                train.base.center_time != base.base.center_time
                or train.period != base.period
                or train.count != base.count
            ):
                raise ConfigurationError(
                    f"{name} train must share center/period/count with pump"
                )
        if self.antistokes.base.peak_amplitude != 0.0:
            raise ConfigurationError(
                "anti-Stokes amplitude must be zero before the interaction"
            )
        # Probe rate must equal Stokes - pump on both branches.
        tau = max(self.pump.base.duration, self.stokes.base.duration)
        probe_rate = self.probe.base.chirp_law.rate
        stokes_rate = self.stokes.base.chirp_law.rate
        pump_rate = self.pump.base.chirp_law.rate
        t_rel = np.linspace(-3.0 * tau, 3.0 * tau, 13)
        mismatch = probe_rate(t_rel) - (stokes_rate(t_rel) - pump_rate(t_rel))
        scale = max(1.0, float(np.max(np.abs(stokes_rate(t_rel)))))
        if float(np.max(np.abs(mismatch))) > 1e-12 * scale:
            raise ConfigurationError(
                "probe chirp law must equal Stokes minus pump at all times"
            )

    @property
    def center_time(self) -> float:
        return self.pump.base.center_time

    @classmethod
    def ccars(
        cls,
        omega_p_peak: float,
        tau0: float,
        alpha_s_prime: float,
        delta_s: float,
        delta_as: float,
        two_photon_delta: float = 0.0,
        center_time: float = 0.0,
        period: float = 0.0,
        count: int = 1,
        carriers: tuple[float, float, float, float] = DEFAULT_CARRIERS,
        balanced: bool = True,
    ) -> "FourLevelCarsParams":
        """Build the control chirp configuration.

        With ``balanced`` (the default) the Stokes and probe amplitudes are
        pump/sqrt(2), which cancels the Stark imbalance exactly; otherwise
        all three incident amplitudes are equal.  All envelopes share the
        Stokes stretch; the probe phase follows its piecewise law (2 a_s then
        0) while keeping the common Gaussian envelope.
        """
        alpha_s = spectral_to_temporal_chirp(alpha_s_prime, tau0)
        w_p, w_s, w_pr, w_as = carriers
        side = omega_p_peak / math.sqrt(2.0) if balanced else omega_p_peak
        pump = ChirpedPulse(
            omega_p_peak, w_p, tau0, -alpha_s_prime, center_time,
            CCarsPumpChirp(alpha_s),
        )
        stokes = ChirpedPulse(
            side, w_s, tau0, alpha_s_prime, center_time,
            CCarsStokesChirp(alpha_s),
        )
        probe = ChirpedPulse(
            side, w_pr, tau0, alpha_s_prime, center_time,
            CCarsProbeChirp(alpha_s),
        )
        antistokes = ChirpedPulse(
            0.0, w_as, tau0, 0.0, center_time, ConstantChirp(0.0)
        )
        return cls(
            pump=PulseTrain(pump, period, count),
            stokes=PulseTrain(stokes, period, count),
            probe=PulseTrain(probe, period, count),
            antistokes=PulseTrain(antistokes, period, count),
            delta_s=delta_s,
            delta_as=delta_as,
            two_photon_delta=two_photon_delta,
        )

    @classmethod
    def transform_limited(
        cls,
        omega_peak: float,
        tau0: float,
        delta_s: float,
        delta_as: float,
        two_photon_delta: float = 0.0,
        center_time: float = 0.0,
        period: float = 0.0,
        count: int = 1,
        carriers: tuple[float, float, float, float] = DEFAULT_CARRIERS,
    ) -> "FourLevelCarsParams":
        """Unchirped pump/Stokes/probe trains with equal peak amplitudes."""
        w_p, w_s, w_pr, w_as = carriers

        def _pulse(amplitude, carrier):
            return ChirpedPulse(
                amplitude, carrier, tau0, 0.0, center_time, ConstantChirp(0.0)
            )

        return cls(
            pump=PulseTrain(_pulse(omega_peak, w_p), period, count),
            stokes=PulseTrain(_pulse(omega_peak, w_s), period, count),
            probe=PulseTrain(_pulse(omega_peak, w_pr), period, count),
            antistokes=PulseTrain(_pulse(0.0, w_as), period, count),
            delta_s=delta_s,
            delta_as=delta_as,
            two_photon_delta=two_photon_delta,
        )


def h_four_level(params: FourLevelCarsParams, t):
    """Four-level CARS Hamiltonian (units of hbar, so entries are rates/2)."""
    t_arr, scalar = _as_time_array(t)
    n = t_arr.shape[0]
    t_rel = params.pump.local_time(t_arr)
    alpha_p = params.pump.chirp_rate(t_arr)
    alpha_s = params.stokes.chirp_rate(t_arr)
    om_p = params.pump.envelope(t_arr)
    om_s = params.stokes.envelope(t_arr)
    om_pr = params.probe.envelope(t_arr)
    om_as = params.antistokes.envelope(t_arr)

    h = np.zeros((n, 4, 4), dtype=complex)
    h[:, 0, 0] = alpha_p * t_rel
    h[:, 1, 1] = alpha_s * t_rel - params.two_photon_delta
    h[:, 2, 2] = -params.delta_s
    h[:, 3, 3] = alpha_p * t_rel - params.delta_as
    h[:, 0, 2] = h[:, 2, 0] = 0.5 * om_p
    h[:, 0, 3] = h[:, 3, 0] = 0.5 * om_as
    h[:, 1, 2] = h[:, 2, 1] = 0.5 * om_s
    h[:, 1, 3] = h[:, 3, 1] = 0.5 * om_pr
    return h[0] if scalar else h


def stark_imbalance(params: FourLevelCarsParams, t):
    """Signed AC Stark residual Omega_1(t) - Omega_2(t)."""
    t_arr, scalar = _as_time_array(t)
    om_p = params.pump.envelope(t_arr)
    om_s = params.stokes.envelope(t_arr)
    om_pr = params.probe.envelope(t_arr)
    om_as = params.antistokes.envelope(t_arr)
    value = (om_p**2 - om_s**2) / (4.0 * params.delta_s) + (
        om_as**2 - om_pr**2
    ) / (4.0 * params.delta_as)
    return value[0] if scalar else value


def ac_stark_balance(params: FourLevelCarsParams, t):
    """Residual |Omega_1(t) - Omega_2(t)|; zero for balanced amplitudes."""
    return np.abs(stark_imbalance(params, t))


@dataclass(frozen=True)
class SuperEffectiveParams:
    """Two-level reduction parameters.

    ``coupling`` is the effective two-photon Rabi profile; ``probe_chirp``
    the piecewise rate a_pr(t) = a_s(t) - a_p(t) entering the diagonal;
    ``stark_imbalance`` an optional residual Omega_1 - Omega_2 (a constant or
    a callable of absolute time), zero under the balanced amplitudes.
    """

    coupling: EffectiveRabi
    probe_chirp: ChirpLaw
    two_photon_delta: float = 0.0
    center_time: float = 0.0
    stark_imbalance: object = 0.0

    @classmethod
    def ccars(
        cls,
        omega3_peak: float,
        tau0: float,
        alpha_s_prime: float,
        two_photon_delta: float = 0.0,
        center_time: float = 0.0,
    ) -> "SuperEffectiveParams":
        """Control configuration from the transform-limited peak Omega_3(0).

        The pump carries spectral chirp -a_s', the Stokes +a_s', so the
        realized coupling peak is Omega_3(0) (1 + a_s'^2/tau0^4)^(-1/2) and
        the coupling width is the common stretched duration.  For t > tc the
        scheme sets a_pr = 0, freezing the two-level diagonal at the
        two-photon detuning alone.
        """
        x = alpha_s_prime / tau0**2
        reduction = 1.0 / math.sqrt(1.0 + x * x)
        tau = tau0 * math.sqrt(1.0 + x * x)
        alpha_s = spectral_to_temporal_chirp(alpha_s_prime, tau0)
        return cls(
            coupling=EffectiveRabi(omega3_peak * reduction, tau, center_time),
            probe_chirp=CCarsProbeChirp(alpha_s),
            two_photon_delta=two_photon_delta,
            center_time=center_time,
        )

    @classmethod
    def opposite_chirp(
        cls,
        omega3_peak: float,
        tau0: float,
        alpha_s_prime: float,
        two_photon_delta: float = 0.0,
        center_time: float = 0.0,
    ) -> "SuperEffectiveParams":
        """Pump and Stokes oppositely chirped for the whole duration.

        Here a_pr = a_s - a_p = 2 a_s at all times (no sign flip at the
        center), the comparison case against the control scheme.
        """
        x = alpha_s_prime / tau0**2
        reduction = 1.0 / math.sqrt(1.0 + x * x)
        tau = tau0 * math.sqrt(1.0 + x * x)
        alpha_s = spectral_to_temporal_chirp(alpha_s_prime, tau0)
        return cls(
            coupling=EffectiveRabi(omega3_peak * reduction, tau, center_time),
            probe_chirp=ConstantChirp(2.0 * alpha_s),
            two_photon_delta=two_photon_delta,
            center_time=center_time,
        )

    def diagonal(self, t):
        """H11 core: delta - a_pr(t)(t - tc) + (Omega_1 - Omega_2)."""
        t_arr, scalar = _as_time_array(t)
        t_rel = t_arr - self.center_time
        value = self.two_photon_delta - self.probe_chirp.rate(t_rel) * t_rel
        if callable(self.stark_imbalance):
            value = value + self.stark_imbalance(t_arr)
        else:
            value = value + self.stark_imbalance
        return value[0] if scalar else value


def h_super_effective(params: SuperEffectiveParams, t):
    """2x2 super-effective Hamiltonian: (1/2) [[a, 2 W3], [2 W3, -a]]."""
    t_arr, scalar = _as_time_array(t)
    a = np.atleast_1d(params.diagonal(t_arr))
    w3 = params.coupling.value(t_arr)
    h = np.zeros((t_arr.shape[0], 2, 2), dtype=complex)
    h[:, 0, 0] = 0.5 * a
    h[:, 1, 1] = -0.5 * a
    h[:, 0, 1] = h[:, 1, 0] = w3
    return h[0] if scalar else h


@dataclass(frozen=True)
class StirapParams:
    """Three-level STIRAP parameters (Stokes precedes pump: t_s < t_p).

    Envelopes are Gaussians exp(-(t - t_q)^2/tau^2); ``pump_chirp`` /
    ``stokes_chirp`` are the linear rates on the corresponding diagonals
    (zero recovers conventional STIRAP).
    """

    omega_p_peak: float
    omega_s_peak: float
    tau: float
    t_pump: float
    t_stokes: float
    delta_one: float = 0.0
    delta_two: float = 0.0
    pump_chirp: float = 0.0
    stokes_chirp: float = 0.0

    def __post_init__(self):
        if self.tau <= 0.0:
            raise ValueError("tau must be positive")

    def pump_envelope(self, t):
        t = np.asarray(t, dtype=float)
        return self.omega_p_peak * np.exp(-((t - self.t_pump) ** 2) / self.tau**2)

    def stokes_envelope(self, t):
        t = np.asarray(t, dtype=float)
        return self.omega_s_peak * np.exp(-((t - self.t_stokes) ** 2) / self.tau**2)


@dataclass(frozen=True)
class ChirpedStirap4Params:
    """STIRAP with a nearly degenerate final doublet split by ``splitting``.

    The Stokes field is resonant with state 3 and detuned by ``splitting``
    from state 4; it couples the intermediate state to both with the same
    envelope, so equal chirps on pump and Stokes select the final state by
    the sign of the rate.
    """

    stirap: StirapParams
    splitting: float

    def __getattr__(self, name):
        return getattr(object.__getattribute__(self, "stirap"), name)


def h_stirap3(params: StirapParams, t):
    """Three-level STIRAP Hamiltonian (hbar = 1)."""
    t_arr, scalar = _as_time_array(t)
    n = t_arr.shape[0]
    h = np.zeros((n, 3, 3), dtype=complex)
    h[:, 0, 0] = params.pump_chirp * (t_arr - params.t_pump)
    h[:, 1, 1] = params.delta_one
    h[:, 2, 2] = params.delta_two + params.stokes_chirp * (t_arr - params.t_stokes)
    h[:, 0, 1] = h[:, 1, 0] = 0.5 * params.pump_envelope(t_arr)
    h[:, 1, 2] = h[:, 2, 1] = 0.5 * params.stokes_envelope(t_arr)
    return h[0] if scalar else h


def h_fstirap(
    pair: FStirapEnvelopePair,
    t,
    delta_one: float = 0.0,
    delta_two: float = 0.0,
):
    """Three-level Hamiltonian driven by the fractional-STIRAP envelopes.

    Identical ladder structure to :func:`h_stirap3` but with the two-hump
    Stokes envelope that freezes the mixing angle at A, leaving the 1-3
    superposition instead of completing the transfer.
    """
    t_arr, scalar = _as_time_array(t)
    n = t_arr.shape[0]
    h = np.zeros((n, 3, 3), dtype=complex)
    h[:, 1, 1] = delta_one
    h[:, 2, 2] = delta_two
    h[:, 0, 1] = h[:, 1, 0] = 0.5 * pair.pump(t_arr)
    h[:, 1, 2] = h[:, 2, 1] = 0.5 * pair.stokes(t_arr)
    return h[0] if scalar else h


def h_stirap4(params: ChirpedStirap4Params, t):
    """Four-level chirped STIRAP Hamiltonian (hbar = 1)."""
    s = params.stirap
    t_arr, scalar = _as_time_array(t)
    n = t_arr.shape[0]
    h = np.zeros((n, 4, 4), dtype=complex)
    beta_term = s.stokes_chirp * (t_arr - s.t_stokes)
    h[:, 0, 0] = s.pump_chirp * (t_arr - s.t_pump)
    h[:, 1, 1] = s.delta_one
    h[:, 2, 2] = beta_term
    h[:, 3, 3] = params.splitting + beta_term
    h[:, 0, 1] = h[:, 1, 0] = 0.5 * s.pump_envelope(t_arr)
    stokes_half = 0.5 * s.stokes_envelope(t_arr)
    h[:, 1, 2] = h[:, 2, 1] = stokes_half
    h[:, 1, 3] = h[:, 3, 1] = stokes_half
    return h[0] if scalar else h
