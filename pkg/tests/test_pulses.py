"""Pulse-model unit tests: chirp conversions, envelopes, laws, trains."""

import math

import numpy as np
import pytest

from chirpcars.pulses import (
    CCarsProbeChirp,
    CCarsPumpChirp,
    CCarsStokesChirp,
    ChirpedPulse,
    ConstantChirp,
    EffectiveRabi,
    FStirapEnvelopePair,
    PulseTrain,
    RoofChirp,
    chirped_duration,
    effective_rabi,
    spectral_to_temporal_chirp,
    temporal_to_spectral_chirp,
)


class TestChirpConversions:
    def test_frozen_reference_rate(self):
        # alpha' = -750, tau0 = 10: x = -7.5, alpha = (x/tau0^2)/(1+x^2)
        assert spectral_to_temporal_chirp(-750.0, 10.0) == pytest.approx(
            -1.3100436681222707e-3, rel=1e-14
        )

    def test_frozen_reference_duration(self):
        assert chirped_duration(-750.0, 10.0) == pytest.approx(
            75.66372975210778, rel=1e-14
        )

    @pytest.mark.parametrize("alpha_prime", [-750.0, -80.0, -1.3, 0.0, 2.5, 400.0])
    @pytest.mark.parametrize("tau0", [4.66074, 10.0, 54.8])
    def test_rate_duration_identity(self, alpha_prime, tau0):
        # alpha * tau^2 * tau0^2 = alpha' exactly, for every chirp
        alpha = spectral_to_temporal_chirp(alpha_prime, tau0)
        tau = chirped_duration(alpha_prime, tau0)
        assert alpha * tau**2 * tau0**2 == pytest.approx(
            alpha_prime, rel=1e-12, abs=1e-15
        )

    @pytest.mark.parametrize("alpha_prime", [-90.0, -10.0, 0.0, 55.5])
    def test_small_root_inversion(self, alpha_prime):
        # within |alpha'| <= tau0^2 the inverse recovers the spectral chirp
        tau0 = 10.0
        alpha = spectral_to_temporal_chirp(alpha_prime, tau0)
        assert temporal_to_spectral_chirp(alpha, tau0) == pytest.approx(
            alpha_prime, rel=1e-12, abs=1e-12
        )

    def test_temporal_rate_is_bounded(self):
        # |alpha| <= 1/(2 tau0^2), attained at |alpha'| = tau0^2
        tau0 = 10.0
        primes = np.linspace(-5000.0, 5000.0, 2001)
        rates = np.array([spectral_to_temporal_chirp(a, tau0) for a in primes])
        bound = 1.0 / (2.0 * tau0**2)
        assert np.max(np.abs(rates)) <= bound * (1.0 + 1e-12)
        assert abs(spectral_to_temporal_chirp(tau0**2, tau0)) == pytest.approx(
            bound, rel=1e-14
        )

    def test_out_of_range_inverse_rejected(self):
        tau0 = 10.0
        with pytest.raises(ValueError):
            temporal_to_spectral_chirp(1.0 / (2.0 * tau0**2) * 1.01, tau0)


class TestChirpedPulse:
    def test_amplitude_reduction_frozen(self):
        pulse = ChirpedPulse(1.0, 4.0, 10.0, -750.0)
        assert pulse.amplitude_reduction == pytest.approx(
            0.36354328503084547, rel=1e-14
        )

    def test_energy_is_chirp_invariant(self):
        # the squared-envelope integral must not change with chirp
        t = np.linspace(-600.0, 600.0, 240001)
        reference = None
        for alpha_prime in (0.0, -80.0, -750.0):
            pulse = ChirpedPulse(1.3, 4.0, 10.0, alpha_prime)
            energy = np.trapezoid(pulse.envelope(t) ** 2, t)
            if reference is None:
                reference = energy
            assert energy == pytest.approx(reference, rel=1e-10)

    def test_phase_derivative_matches_instantaneous_frequency(self):
        pulse = ChirpedPulse(1.0, 4.0, 10.0, -120.0, center_time=3.0)
        t = np.linspace(-40.0, 46.0, 4001)
        dt = t[1] - t[0]
        numeric = np.gradient(pulse.phase(t), dt)
        expected = pulse.instantaneous_frequency(t)
        # away from the endpoints the centered difference is O(dt^2)
        assert np.allclose(numeric[2:-2], expected[2:-2], atol=5e-3)

    def test_default_law_is_constant_rate(self):
        pulse = ChirpedPulse(1.0, 4.0, 10.0, -750.0)
        assert isinstance(pulse.chirp_law, ConstantChirp)
        assert pulse.chirp_law.rate(0.0) == pytest.approx(pulse.temporal_chirp)

    def test_invalid_parameters_rejected(self):
        with pytest.raises(ValueError):
            ChirpedPulse(1.0, 4.0, 0.0)
        with pytest.raises(ValueError):
            ChirpedPulse(-1.0, 4.0, 10.0)


class TestChirpLaws:
    def test_control_scheme_branches(self):
        alpha_s = 7.0e-4
        pump = CCarsPumpChirp(alpha_s)
        stokes = CCarsStokesChirp(alpha_s)
        probe = CCarsProbeChirp(alpha_s)
        t = np.array([-5.0, -1e-9, 0.0, 1e-9, 5.0])
        # pump flips -alpha_s -> +alpha_s at the center (t = 0 on the left
        # branch), the Stokes rate never changes, the probe drops 2 alpha_s
        # to 0
        assert np.allclose(pump.rate(t), [-alpha_s, -alpha_s, -alpha_s,
                                          alpha_s, alpha_s])
        assert np.allclose(stokes.rate(t), alpha_s)
        assert np.allclose(probe.rate(t), [2 * alpha_s, 2 * alpha_s,
                                           2 * alpha_s, 0.0, 0.0])

    def test_roof_law_branches(self):
        law = RoofChirp(0.3, -0.2)
        assert law.rate(-1.0) == 0.3
        assert law.rate(0.0) == 0.3
        assert law.rate(1.0) == -0.2

    def test_sum_rule_pump_stokes(self):
        # probe rate = stokes - pump at every instant of the control scheme
        alpha_s = 1.3e-3
        t = np.linspace(-20.0, 20.0, 101)
        diff = CCarsStokesChirp(alpha_s).rate(t) - CCarsPumpChirp(alpha_s).rate(t)
        assert np.allclose(diff, CCarsProbeChirp(alpha_s).rate(t))


class TestPulseTrain:
    def test_single_pulse_matches_base(self):
        base = ChirpedPulse(1.0, 4.0, 10.0, -120.0)
        train = PulseTrain(base, period=0.0, count=1)
        t = np.linspace(-50.0, 50.0, 501)
        assert np.allclose(train.field(t), base.field(t))
        assert train.span == 0.0

    def test_periodic_replication(self):
        base = ChirpedPulse(1.0, 4.0, 4.66074, -10.0)
        train = PulseTrain(base, period=85.05, count=10)
        assert train.span == pytest.approx(9 * 85.05)
        t = np.linspace(-20.0, 20.0, 200)
        for k in (1, 4, 9):
            assert np.allclose(
                train.envelope(t + k * 85.05), base.envelope(t), atol=1e-12
            )

    def test_local_time_and_index(self):
        base = ChirpedPulse(1.0, 4.0, 4.66074, 0.0)
        train = PulseTrain(base, period=100.0, count=5)
        assert train.pulse_index(350.1) == 4
        assert train.pulse_index(349.9) == 3
        assert train.local_time(401.5) == pytest.approx(1.5)
        # before the train every time belongs to the first pulse
        assert train.pulse_index(-500.0) == 0

    def test_chirp_rate_switches_inside_every_pulse(self):
        alpha_s = 5.0e-4
        base = ChirpedPulse(1.0, 4.0, 4.66074, -10.0,
                            chirp_law=CCarsPumpChirp(alpha_s))
        train = PulseTrain(base, period=85.05, count=3)
        for k in range(3):
            center = k * 85.05
            assert train.chirp_rate(center - 0.5) == pytest.approx(-alpha_s)
            assert train.chirp_rate(center + 0.5) == pytest.approx(alpha_s)


class TestEffectiveRabi:
    def test_frozen_unchirped_peak(self):
        coupling = EffectiveRabi.from_pulses(1.08, 1.0, 0.0, 0.0, 10.0)
        assert coupling.peak == pytest.approx(0.20619233739399714, rel=1e-14)
        assert coupling.tau == pytest.approx(10.0, rel=1e-14)

    def test_opposite_chirp_reduction(self):
        # pump -a', Stokes +a': reduction (1+x^2)^(-1/2), tau stretched
        tau0, alpha_prime = 10.0, -750.0
        coupling = EffectiveRabi.from_pulses(
            1.08, 1.0, -alpha_prime, alpha_prime, tau0
        )
        x = alpha_prime / tau0**2
        base = 1.08**2 / (4.0 * math.sqrt(2.0))
        assert coupling.peak == pytest.approx(base / math.sqrt(1 + x * x))
        assert coupling.tau == pytest.approx(chirped_duration(alpha_prime, tau0))

    def test_derivative_is_analytic(self):
        coupling = EffectiveRabi(0.5, 12.0, center_time=1.0)
        t = np.linspace(-30.0, 32.0, 2001)
        dt = t[1] - t[0]
        numeric = np.gradient(coupling.value(t), dt)
        assert np.allclose(numeric[2:-2], coupling.derivative(t)[2:-2],
                           atol=1e-5)

    def test_zero_detuning_rejected(self):
        with pytest.raises(ValueError):
            EffectiveRabi.from_pulses(1.0, 0.0, 0.0, 0.0, 10.0)

    def test_function_wrapper(self):
        t = np.linspace(-5, 5, 11)
        direct = EffectiveRabi.from_pulses(1.08, 1.0, 0.0, 0.0, 10.0).value(t)
        assert np.allclose(effective_rabi(1.08, 1.0, 0.0, 0.0, 10.0, t), direct)


class TestFStirapEnvelopes:
    def test_mixing_angle_monotone_with_limits(self):
        pair = FStirapEnvelopePair(0.3, math.pi / 4, 35.0, 50.0)
        t = np.linspace(-280.0, 280.0, 5601)
        theta = pair.mixing_angle(t)
        support = (pair.pump(t) > 1e-12 * 0.3) & (pair.stokes(t) > 1e-12 * 0.3)
        assert np.all(np.diff(theta[support]) >= -1e-12)
        # the opposite-side Gaussian tail leaves a ~1e-7 residual angle
        assert theta[0] == pytest.approx(0.0, abs=1e-6)
        assert theta[-1] == pytest.approx(math.pi / 4, abs=1e-6)

    def test_half_mixing_recovers_plain_ordering(self):
        # A = pi/2 removes the late Stokes hump: pure counter-intuitive pair
        pair = FStirapEnvelopePair(0.3, math.pi / 2, 35.0, 50.0)
        t = np.linspace(-200.0, 200.0, 801)
        early = 0.3 * np.exp(-((t + 35.0) ** 2) / 50.0**2)
        assert np.allclose(pair.stokes(t), early, atol=1e-16)
        assert np.argmax(pair.stokes(t)) < np.argmax(pair.pump(t))

    def test_late_ratio_tends_to_tan_mixing(self):
        for mixing in (0.3, math.pi / 4, 1.2):
            pair = FStirapEnvelopePair(0.3, mixing, 35.0, 50.0)
            ratio = pair.pump(400.0) / pair.stokes(400.0)
            assert ratio == pytest.approx(math.tan(mixing), rel=1e-8)
