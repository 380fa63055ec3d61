"""Dressed-state diagnostics and Wigner-Ville time-frequency maps.

The two-level dressed frame diagonalizes the reduced Raman Hamiltonian; the
non-adiabatic parameter theta_dot measures the residual coupling between the
dressed states, and the control scheme is recognizable by theta_dot vanishing
identically after the pulse center at two-photon resonance.  The three-level
frame provides the STIRAP mixing angles, adiabatic energies and the dark
state.  Wigner maps come in a closed form for linearly chirped Gaussians and
a direct quadrature of

    W(t, w) = integral f(t + s/2) f(t - s/2) exp(-i w s) ds

for arbitrary sampled fields.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import SamplingError, SingularDenominatorError
from .hamiltonians import StirapParams, SuperEffectiveParams
from .pulses import ChirpedPulse

__all__ = [
    "DressedDiagnostics2",
    "Stirap3Frame",
    "WignerGrid",
    "nonadiabatic_parameter",
    "dressed_hamiltonian_2",
    "stirap_frame",
    "h_a1_correction",
    "wigner_closed_form",
    "wigner_numeric",
    "ridge_frequencies",
]


def _detuning_term(params: SuperEffectiveParams, t_arr):
    """-delta + a_pr(t)(t - tc), the dressed-frame detuning variable."""
    t_rel = t_arr - params.center_time
    return -params.two_photon_delta + params.probe_chirp.rate(t_rel) * t_rel


def nonadiabatic_parameter(params: SuperEffectiveParams, t):
    """Non-adiabatic coupling theta_dot(t) of the two-level dressed frame.

    theta_dot = [a Omega3' - 2 Omega3 a_pr] / [a^2 + 4 Omega3^2] with
    a = -delta + a_pr (t - tc); the coupling derivative is analytic (Gaussian),
    never a finite difference.
    """
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    scalar = np.ndim(t) == 0
    t_rel = t_arr - params.center_time
    a = _detuning_term(params, t_arr)
    rate = params.probe_chirp.rate(t_rel)
    w3 = params.coupling.value(t_arr)
    w3_dot = params.coupling.derivative(t_arr)
    denom = a * a + 4.0 * w3 * w3
    if np.any(denom <= 1e-30):
        bad = t_arr[np.argmax(denom <= 1e-30)]
        raise SingularDenominatorError(
            "dressed-frame denominator vanished", float(bad)
        )
    theta_dot = (a * w3_dot - 2.0 * w3 * rate) / denom
    return float(theta_dot[0]) if scalar else theta_dot


def dressed_hamiltonian_2(params: SuperEffectiveParams, t):
    """Dressed two-level Hamiltonian (1/2)[[-g, -i theta_dot], [i theta_dot, g]]

    with g = sqrt(a^2 + (2 Omega3)^2); the diagonal holds the dressed
    energies, the off-diagonal the residual non-adiabatic coupling.
    """
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    scalar = np.ndim(t) == 0
    a = _detuning_term(params, t_arr)
    w3 = params.coupling.value(t_arr)
    gap = np.sqrt(a * a + 4.0 * w3 * w3)
    theta_dot = np.atleast_1d(nonadiabatic_parameter(params, t_arr))
    h = np.zeros((t_arr.shape[0], 2, 2), dtype=complex)
    h[:, 0, 0] = -0.5 * gap
    h[:, 1, 1] = 0.5 * gap
    h[:, 0, 1] = -0.5j * theta_dot
    h[:, 1, 0] = 0.5j * theta_dot
    return h[0] if scalar else h


@dataclass(frozen=True)
class DressedDiagnostics2:
    """Bare/dressed energies and theta_dot sampled on a time grid."""

    times: np.ndarray
    bare_energies: np.ndarray     # (T, 2): diagonal of the bare Hamiltonian
    dressed_energies: np.ndarray  # (T, 2): diagonal of the dressed one
    theta_dot: np.ndarray

    @classmethod
    def sample(cls, params: SuperEffectiveParams, times) -> "DressedDiagnostics2":
        times = np.asarray(times, dtype=float)
        a_bare = np.atleast_1d(params.diagonal(times))
        bare = 0.5 * np.stack([a_bare, -a_bare], axis=1)
        hd = dressed_hamiltonian_2(params, times)
        dressed = np.stack([hd[:, 0, 0].real, hd[:, 1, 1].real], axis=1)
        return cls(
            times=times,
            bare_energies=bare,
            dressed_energies=dressed,
            theta_dot=np.atleast_1d(nonadiabatic_parameter(params, times)),
        )

    @property
    def gap(self) -> np.ndarray:
        return self.dressed_energies[:, 1] - self.dressed_energies[:, 0]

    @property
    def adiabaticity_ratio(self) -> np.ndarray:
        """r(t) = |theta_dot| / (lambda_2 - lambda_1)."""
        return np.abs(self.theta_dot) / self.gap


@dataclass(frozen=True)
class Stirap3Frame:
    """STIRAP mixing angles, adiabatic energies and dark state at time(s) t.

    ``dark_state`` rows are (cos theta, 0, -sin theta); the vanishing middle
    component is exact by construction.
    """

    theta: np.ndarray
    phi: np.ndarray
    omega_rms: np.ndarray
    lambda_plus: np.ndarray
    lambda_zero: np.ndarray
    lambda_minus: np.ndarray
    dark_state: np.ndarray


def stirap_frame(params: StirapParams, t) -> Stirap3Frame:
    """Adiabatic frame of the three-level system at time(s) ``t``.

    tan(theta) = pump/Stokes, tan(2 phi) = Omega_rms/Delta, and the adiabatic
    energies are lambda_pm = (Delta -++ sqrt(Delta^2 + Omega_rms^2))/2 with
    lambda_0 = 0 identically at two-photon resonance.
    """
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    pump = params.pump_envelope(t_arr)
    stokes = params.stokes_envelope(t_arr)
    theta = np.arctan2(pump, stokes)
    omega_rms = np.hypot(pump, stokes)
    phi = 0.5 * np.arctan2(omega_rms, params.delta_one)
    root = np.sqrt(params.delta_one**2 + omega_rms**2)
    lam_plus = 0.5 * (params.delta_one + root)
    lam_minus = 0.5 * (params.delta_one - root)
    dark = np.stack([np.cos(theta), np.zeros_like(theta), -np.sin(theta)], axis=1)
    return Stirap3Frame(
        theta=theta,
        phi=phi,
        omega_rms=omega_rms,
        lambda_plus=lam_plus,
        lambda_zero=np.zeros_like(lam_plus),
        lambda_minus=lam_minus,
        dark_state=dark,
    )


def h_a1_correction(delta: float, theta, phi):
    """Two-photon-detuning correction to the adiabatic-frame Hamiltonian.

    Returns the 3x3 matrix (delta/2) *

        [cos2t sin^2 p,      -sin2t sin p,  cos2t sin2p / 2]
        [-sin2t sin p,       -cos2t,        -sin2t cos p   ]
        [cos2t sin2p / 2,    -sin2t cos p,  cos2t cos^2 p  ]

    which vanishes identically at two-photon resonance.
    """
    theta = float(theta)
    phi = float(phi)
    c2t = np.cos(2.0 * theta)
    s2t = np.sin(2.0 * theta)
    sp, cp = np.sin(phi), np.cos(phi)
    s2p = np.sin(2.0 * phi)
    m = np.array(
        [
            [c2t * sp * sp, -s2t * sp, 0.5 * c2t * s2p],
            [-s2t * sp, -c2t, -s2t * cp],
            [0.5 * c2t * s2p, -s2t * cp, c2t * cp * cp],
        ]
    )
    return 0.5 * delta * m


@dataclass(frozen=True)
class WignerGrid:
    """Wigner map W(t, w) on a rectangular grid; values shape (T, W)."""

    times: np.ndarray
    omegas: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != (self.times.shape[0], self.omegas.shape[0]):
            raise ValueError("values shape must be (len(times), len(omegas))")


def wigner_closed_form(pulse: ChirpedPulse, times, omegas) -> WignerGrid:
    """Analytic Wigner map of a linearly chirped Gaussian.

    W = (tau sqrt(pi)/2) E'^2 exp(-(t-tc)^2/tau^2)
        [exp(-tau^2 (w - wq - a(t-tc))^2) + exp(-tau^2 (w + wq + a(t-tc))^2)]

    For piecewise rates the local branch value of a is used; the cross-branch
    interference region |t - tc| < 2/wq is approximate in that case.
    """
    times = np.asarray(times, dtype=float)
    omegas = np.asarray(omegas, dtype=float)
    tau = pulse.duration
    amp = pulse.peak_envelope
    t_rel = (times - pulse.center_time)[:, None]
    w = omegas[None, :]
    rate = pulse.chirp_law.rate(times - pulse.center_time)[:, None]
    ridge = pulse.carrier + rate * t_rel
    values = (
        0.5
        * tau
        * np.sqrt(np.pi)
        * amp**2
        * np.exp(-(t_rel**2) / tau**2)
        * (np.exp(-(tau**2) * (w - ridge) ** 2) + np.exp(-(tau**2) * (w + ridge) ** 2))
    )
    return WignerGrid(times=times, omegas=omegas, values=values)


def wigner_numeric(
    field,
    times,
    omegas,
    half_window: float | None = None,
    sample_dt: float | None = None,
    max_angular_frequency: float | None = None,
) -> WignerGrid:
    """Trapezoidal Wigner transform of a real field.

    Parameters
    ----------
    field : ChirpedPulse or callable
        The real field f(t); a pulse supplies its own window (where the
        integrand envelope falls below 1e-12 of its local peak) and carrier.
    times, omegas : array_like
        Evaluation grid.
    half_window : float, optional
        Half-extent of the correlation-lag integral; required for a bare
        callable.
    sample_dt : float, optional
        Lag-grid step; defaults to the steepest admissible value.
    max_angular_frequency : float, optional
        Largest angular frequency present; the lag grid must sample at least
        8x this rate or :class:`SamplingError` is raised.
    """
    times = np.asarray(times, dtype=float)
    omegas = np.asarray(omegas, dtype=float)
    if isinstance(field, ChirpedPulse):
        pulse = field
        f = pulse.field
        if half_window is None:
            # envelope product < 1e-12 relative: |lag| > 2 tau sqrt(12 ln 10)
            half_window = 2.0 * pulse.duration * np.sqrt(12.0 * np.log(10.0))
        if max_angular_frequency is None:
            span = np.linspace(
                min(np.min(times), pulse.center_time) - 0.5 * half_window,
                max(np.max(times), pulse.center_time) + 0.5 * half_window,
                257,
            )
            max_angular_frequency = float(
                max(
                    np.max(np.abs(pulse.instantaneous_frequency(span))),
                    np.max(np.abs(omegas)),
                )
            )
    else:
        f = field
        if half_window is None:
            raise ValueError("half_window is required for a bare callable")
        if max_angular_frequency is None:
            max_angular_frequency = float(np.max(np.abs(omegas)))

    # Sampling guard: at least 8 samples per period of the fastest component.
    dt_max = np.pi / (4.0 * max_angular_frequency)
    if sample_dt is None:
        sample_dt = dt_max
    elif sample_dt > dt_max * (1.0 + 1e-12):
        raise SamplingError(
            f"lag step {sample_dt:.3g} undersamples the fastest component; "
            f"need <= {dt_max:.3g} (8 samples per period)"
        )

    m = int(np.ceil(half_window / sample_dt))
    lags = np.arange(-m, m + 1) * sample_dt
    weights = np.ones_like(lags)
    weights[0] = weights[-1] = 0.5
    kernel = np.exp(-1j * omegas[:, None] * lags[None, :]) * weights[None, :]

    values = np.empty((times.shape[0], omegas.shape[0]))
    for i, t0 in enumerate(times):
        product = np.asarray(f(t0 + 0.5 * lags)) * np.asarray(f(t0 - 0.5 * lags))
        values[i] = (kernel @ product).real * sample_dt
    return WignerGrid(times=times, omegas=omegas, values=values)


def ridge_frequencies(grid: WignerGrid) -> np.ndarray:
    """Frequency of the maximum of W at each time (on the given omega grid)."""
    return grid.omegas[np.argmax(grid.values, axis=1)]
