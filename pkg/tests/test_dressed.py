"""Dressed-frame diagnostics and Wigner time-frequency map tests."""

import math

import numpy as np
import pytest
from scipy.linalg import eigh

from chirpcars.dressed import (
    DressedDiagnostics2,
    WignerGrid,
    dressed_hamiltonian_2,
    h_a1_correction,
    nonadiabatic_parameter,
    ridge_frequencies,
    stirap_frame,
    wigner_closed_form,
    wigner_numeric,
)
from chirpcars.errors import SamplingError, SingularDenominatorError
from chirpcars.hamiltonians import (
    StirapParams,
    SuperEffectiveParams,
    h_stirap3,
    h_super_effective,
)
from chirpcars.pulses import ChirpedPulse, ConstantChirp, EffectiveRabi, RoofChirp


class TestDressedTwoLevel:
    def setup_method(self):
        self.params = SuperEffectiveParams.ccars(5.0, 10.0, -750.0)

    def test_dressed_energies_match_scipy_eigh(self):
        for t in (-80.0, -20.0, -1.0, 15.0):
            h_bare = h_super_effective(self.params, t)
            expected = eigh(h_bare, eigvals_only=True)
            hd = dressed_hamiltonian_2(self.params, t)
            assert hd[0, 0].real == pytest.approx(expected[0], rel=1e-12)
            assert hd[1, 1].real == pytest.approx(expected[1], rel=1e-12)

    def test_offdiagonal_is_nonadiabatic_coupling(self):
        t = -33.0
        hd = dressed_hamiltonian_2(self.params, t)
        theta_dot = nonadiabatic_parameter(self.params, t)
        assert hd[0, 1] == pytest.approx(-0.5j * theta_dot)
        assert hd[1, 0] == pytest.approx(0.5j * theta_dot)

    def test_frozen_coupling_values(self):
        assert nonadiabatic_parameter(self.params, -50.0) == pytest.approx(
            0.004306367621543956, rel=1e-12
        )
        assert nonadiabatic_parameter(self.params, -10.0) == pytest.approx(
            0.0020517912172398887, rel=1e-12
        )

    def test_locking_after_center(self):
        # at two-photon resonance the control scheme freezes the mixing
        # angle for t > tc: both the detuning and its sweep rate vanish
        t = np.linspace(1e-9, 340.0, 2000)
        assert np.max(np.abs(nonadiabatic_parameter(self.params, t))) < 1e-12

    def test_no_locking_with_detuning(self):
        detuned = SuperEffectiveParams.ccars(5.0, 10.0, -750.0,
                                             two_photon_delta=0.1)
        t = np.linspace(10.0, 200.0, 500)
        assert np.max(np.abs(nonadiabatic_parameter(detuned, t))) > 1e-6

    def test_adiabaticity_strong_field_wins(self):
        weak = SuperEffectiveParams.ccars(0.18, 25.0, -0.8 * 25.0**2)
        strong = SuperEffectiveParams.ccars(5.0, 10.0, -7.5 * 10.0**2)
        ratios = {}
        for name, params in (("weak", weak), ("strong", strong)):
            tau = params.coupling.tau
            t = np.linspace(-4.0 * tau, 0.0, 4001)
            diag = DressedDiagnostics2.sample(params, t)
            ratios[name] = np.max(diag.adiabaticity_ratio)
        assert ratios["weak"] == pytest.approx(0.37906775785187874, rel=1e-12)
        assert ratios["strong"] == pytest.approx(0.039346582026264315,
                                                 rel=1e-12)
        assert ratios["weak"] > 5.0 * ratios["strong"]

    def test_diagnostics_shapes_and_gap(self):
        t = np.linspace(-60.0, 60.0, 7)
        diag = DressedDiagnostics2.sample(self.params, t)
        assert diag.bare_energies.shape == (7, 2)
        assert diag.dressed_energies.shape == (7, 2)
        assert np.all(diag.gap > 0.0)
        # dressed gap >= bare splitting always
        bare_split = diag.bare_energies[:, 0] - diag.bare_energies[:, 1]
        assert np.all(diag.gap >= np.abs(bare_split) - 1e-15)

    def test_vanishing_denominator_raises(self):
        params = SuperEffectiveParams(
            coupling=EffectiveRabi(1.0, 10.0), probe_chirp=ConstantChirp(0.0)
        )
        with pytest.raises(SingularDenominatorError):
            nonadiabatic_parameter(params, 100.0)


class TestStirapFrame:
    def setup_method(self):
        self.params = StirapParams(0.3, 0.3, 60.0, 35.0, -35.0, delta_one=0.2)

    def test_dark_state_middle_component(self):
        frame = stirap_frame(self.params, np.linspace(-150.0, 150.0, 31))
        assert np.all(frame.dark_state[:, 1] == 0.0)
        assert np.allclose(np.linalg.norm(frame.dark_state, axis=1), 1.0)

    def test_dark_state_is_null_vector(self):
        # at two-photon resonance H psi_dark = 0 exactly
        for t in (-40.0, 0.0, 40.0):
            h = h_stirap3(self.params, t)
            frame = stirap_frame(self.params, t)
            residual = h @ frame.dark_state[0]
            assert np.max(np.abs(residual)) < 1e-15

    def test_adiabatic_energies_match_scipy(self):
        for t in (-50.0, 0.0, 50.0):
            h = h_stirap3(self.params, t)
            expected = eigh(h, eigvals_only=True)
            frame = stirap_frame(self.params, t)
            got = np.sort(
                [frame.lambda_minus[0], frame.lambda_zero[0],
                 frame.lambda_plus[0]]
            )
            assert np.allclose(got, expected, atol=1e-14)

    def test_mixing_angle_sweep(self):
        # theta runs 0 -> pi/2 as the pulse pair plays out
        frame = stirap_frame(self.params, np.array([-300.0, 300.0]))
        assert frame.theta[0] == pytest.approx(0.0, abs=1e-3)
        assert frame.theta[1] == pytest.approx(math.pi / 2, abs=1e-3)
        assert frame.omega_rms[0] == pytest.approx(
            self.params.stokes_envelope(-300.0), rel=1e-6
        )


class TestCorrectionMatrix:
    def test_vanishes_on_resonance(self):
        assert np.all(h_a1_correction(0.0, 0.7, 0.3) == 0.0)

    def test_traceless_and_symmetric(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            theta, phi = rng.uniform(0, math.pi / 2, size=2)
            m = h_a1_correction(0.2, theta, phi)
            assert abs(np.trace(m)) < 1e-15
            assert np.allclose(m, m.T)

    def test_initial_angle_pattern(self):
        # theta = 0: diagonal (sin^2, -1, cos^2) and a single 1-3 element
        delta, phi = 0.3, 0.25
        m = h_a1_correction(delta, 0.0, phi)
        half = 0.5 * delta
        assert m[0, 0] == pytest.approx(half * math.sin(phi) ** 2)
        assert m[1, 1] == pytest.approx(-half)
        assert m[2, 2] == pytest.approx(half * math.cos(phi) ** 2)
        assert m[0, 2] == pytest.approx(0.5 * half * math.sin(2 * phi))
        assert m[0, 1] == m[1, 2] == 0.0

    def test_resonant_intermediate_pattern(self):
        # Delta = 0 gives phi = pi/4; at theta = pi/4 only the off-diagonal
        # row survives with weight -delta/(2 sqrt 2)
        delta = 0.3
        m = h_a1_correction(delta, math.pi / 4, math.pi / 4)
        value = -0.5 * delta / math.sqrt(2.0)
        assert np.allclose(np.diagonal(m), 0.0, atol=1e-16)
        assert m[0, 1] == pytest.approx(value)
        assert m[1, 2] == pytest.approx(value)
        assert m[0, 2] == pytest.approx(0.0, abs=1e-16)


class TestWigner:
    def setup_method(self):
        self.pulse = ChirpedPulse(1.0, 4.0, 10.0, -750.0)
        self.alpha = self.pulse.temporal_chirp
        self.tau = self.pulse.duration

    def test_numeric_matches_closed_form_on_ridge(self):
        times = np.linspace(-1.5 * self.tau, 1.5 * self.tau, 21)
        ridge = 4.0 + self.alpha * times
        numeric = wigner_numeric(self.pulse, times, ridge)
        closed = wigner_closed_form(self.pulse, times, ridge)
        got = np.diagonal(numeric.values)
        expected = np.diagonal(closed.values)
        assert np.max(np.abs(got - expected) / expected) < 1e-6

    def test_ridge_follows_instantaneous_frequency(self):
        times = np.linspace(-100.0, 100.0, 41)
        omegas = np.linspace(3.5, 4.5, 201)
        grid = wigner_closed_form(self.pulse, times, omegas)
        cell = omegas[1] - omegas[0]
        expected = 4.0 + self.alpha * times
        assert np.max(np.abs(ridge_frequencies(grid) - expected)) <= cell

    def test_roof_law_ridge_is_even(self):
        roof = ChirpedPulse(1.0, 4.0, 10.0, -750.0,
                            chirp_law=RoofChirp(-self.alpha, self.alpha))
        times = np.linspace(-100.0, 100.0, 41)
        omegas = np.linspace(3.5, 4.5, 201)
        grid = wigner_closed_form(roof, times, omegas)
        ridge = ridge_frequencies(grid)
        expected = 4.0 + np.where(times <= 0, -self.alpha, self.alpha) * times
        assert np.max(np.abs(ridge - expected)) <= omegas[1] - omegas[0]

    def test_total_energy_slice(self):
        # frequency integral of W at the center recovers the closed form
        omegas = np.linspace(0.0, 8.0, 4001)
        grid = wigner_closed_form(self.pulse, np.array([0.0]), omegas)
        integral = np.trapezoid(grid.values[0], omegas)
        # each lobe is a Gaussian of width 1/tau, area sqrt(pi)/tau; only the
        # positive-frequency lobe sits in [0, 8], so the slice integrates to
        # (pi/2) E'^2 regardless of chirp
        expected = 0.5 * math.pi * self.pulse.peak_envelope**2
        assert integral == pytest.approx(expected, rel=1e-6)

    def test_undersampled_lag_grid_raises(self):
        times = np.array([0.0])
        omegas = np.array([4.0])
        with pytest.raises(SamplingError):
            wigner_numeric(self.pulse, times, omegas, sample_dt=1.0)

    def test_bare_callable_requires_window(self):
        with pytest.raises(ValueError):
            wigner_numeric(np.cos, np.array([0.0]), np.array([1.0]))

    def test_callable_path_matches_pulse_path(self):
        times = np.array([-20.0, 0.0, 20.0])
        omegas = np.array([3.9, 4.0, 4.1])
        window = 2.0 * self.tau * math.sqrt(12.0 * math.log(10.0))
        via_pulse = wigner_numeric(self.pulse, times, omegas)
        via_callable = wigner_numeric(
            self.pulse.field, times, omegas, half_window=window,
            sample_dt=math.pi / (4.0 * 6.0), max_angular_frequency=6.0,
        )
        assert np.allclose(via_pulse.values, via_callable.values,
                           rtol=1e-6, atol=1e-9)

    def test_grid_shape_validated(self):
        with pytest.raises(ValueError):
            WignerGrid(times=np.zeros(3), omegas=np.zeros(4),
                       values=np.zeros((4, 3)))
