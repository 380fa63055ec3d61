"""Multilayer propagation of the four Raman fields through a molecular cloud.

The cloud is a Gaussian density profile sliced into layers: each layer is
assigned the fractional density eta(z) and a width equal to the central-layer
width scaled by the inverse relative density, so layers thin out towards the
wings and the construction terminates at a density floor (calibrated once,
below).  Within a layer the reduced Maxwell equations

    dW_p/dt  = -eta kappa_13 w_p  W_s  Im[rho_12] / (2 (D_s  + a_p  t))
    dW_s/dt  = +eta kappa_23 w_s  W_p  Im[rho_12] / (2 (D_s  + a_s  t))
    dW_pr/dt = +eta kappa_24 w_pr W_as Im[rho_12] / (2 (D_as + a_pr t))
    dW_as/dt = -eta kappa_14 w_as W_pr Im[rho_12] / (2  D_as)

are co-evolved with the density-matrix dynamics on a shared time grid (the
space derivative is eliminated in retarded time, so there is no spatial
grid); t in the denominators and in the diagonal chirp terms is the per-pulse
local time.  Each layer sees fresh ground-state molecules.  The time loop is
compiled with numba when available and otherwise runs the same code in pure
Python.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    ConfigurationError,
    IntegrationError,
    SingularDenominatorError,
)
from .hamiltonians import FourLevelCarsParams
from .units import (
    AVOGADRO,
    HBAR_SI,
    DEBYE,
    MOLAR_VOLUME_IDEAL_GAS,
    OMEGA_REF_HZ,
    SPEED_OF_LIGHT,
    VACUUM_PERMEABILITY,
    ideal_gas_number_density,
)

__all__ = [
    "ETA_FLOOR_RELATIVE",
    "EPS_DIV",
    "Layer",
    "LayerStack",
    "MediumParams",
    "BeerPath",
    "FieldSet",
    "LayerRecord",
    "PropagationResult",
    "kappa_constant",
    "build_layers",
    "adiabatic_coherences",
    "scatter_layer",
    "propagate",
    "beer_attenuate",
]

#: Relative density below which layer construction stops.  Calibrated once so
#: that sigma = 0.2 m with a 1e-10 m molecule diameter and the ideal-gas molar
#: volume yields exactly 199 layers (the geometric mean of the relative
#: densities of the last kept and first dropped layer in that configuration).
ETA_FLOOR_RELATIVE = 0.9999972207774955

#: Denominator guard for the reduced Maxwell equations and the adiabatic
#: coherence quotients; configurations driving any |detuning + chirp * t|
#: below this abort rather than regularize, because the equations genuinely
#: diverge there.
EPS_DIV = 1e-6


def kappa_constant(mu_debye: float, n: float) -> float:
    """Field-matter coupling kappa = n mu0 mu^2 c^2 / (3 hbar), in w21 units.

    ``mu_debye`` is the transition dipole in debye, ``n`` the molecular
    number density in 1/m^3.  The 1/3 comes from orientation averaging.
    """
    if mu_debye <= 0.0:
        raise ValueError("dipole moment must be positive")
    if n <= 0.0:
        raise ValueError("number density must be positive")
    mu = mu_debye * DEBYE
    rate = n * VACUUM_PERMEABILITY * mu * mu * SPEED_OF_LIGHT**2 / (3.0 * HBAR_SI)
    return rate / OMEGA_REF_HZ


@dataclass(frozen=True)
class MediumParams:
    """Molecular-medium constants for the reduced Maxwell equations."""

    kappa: dict                   # {(i, j): kappa_ij [w21]} for the 4 dipoles
    diameter: float               # molecule diameter [m]
    molar_volume: float           # [m^3/mol]
    extinction: float = 0.55      # Beer extinction coefficient [1/km]

    _PAIRS = ((1, 3), (2, 3), (2, 4), (1, 4))

    def __post_init__(self):
        for pair in self._PAIRS:
            if pair not in self.kappa:
                raise ConfigurationError(f"kappa missing transition {pair}")
            if self.kappa[pair] < 0.0:
                raise ConfigurationError(f"kappa[{pair}] must be >= 0")
        if self.diameter <= 0.0 or self.molar_volume <= 0.0:
            raise ConfigurationError("diameter and molar volume must be positive")

    @classmethod
    def methanol_like(
        cls,
        mu_debye: float = 1.70,
        diameter: float = 1e-10,
        molar_volume: float = MOLAR_VOLUME_IDEAL_GAS,
        extinction: float = 0.55,
    ) -> "MediumParams":
        """All four transition dipoles equal; ideal-gas number density."""
        kappa = kappa_constant(mu_debye, ideal_gas_number_density(molar_volume))
        return cls(
            kappa={pair: kappa for pair in cls._PAIRS},
            diameter=diameter,
            molar_volume=molar_volume,
            extinction=extinction,
        )


@dataclass(frozen=True)
class Layer:
    z: float      # absolute position [m]
    eta: float    # fractional density entering the Maxwell equations
    dz: float     # layer width [m]


@dataclass(frozen=True)
class LayerStack:
    layers: tuple
    sigma: float
    z0: float

    def __len__(self):
        return len(self.layers)

    @property
    def etas(self) -> np.ndarray:
        return np.array([layer.eta for layer in self.layers])

    @property
    def positions(self) -> np.ndarray:
        return np.array([layer.z for layer in self.layers])


def build_layers(
    sigma: float,
    z0: float,
    d: float,
    V0: float,
    eta_floor_rel: float = ETA_FLOOR_RELATIVE,
) -> LayerStack:
    """Slice a Gaussian cloud into scattering layers.

    The central layer packs the target molecules side by side, which fixes
    its width C = 4 V0 / (pi d^2 N_A); a layer at z is wider by the inverse
    relative density exp(+(z-z0)^2/(2 sigma^2)) and carries the absolute
    fractional density eta(z) = [C / (sqrt(2 pi) sigma)] exp(-(z-z0)^2 /
    (2 sigma^2)).  Positions advance by the current layer's width until the
    relative density drops below ``eta_floor_rel``; the left side mirrors the
    right.
    """
    if sigma <= 0.0 or d <= 0.0 or V0 <= 0.0:
        raise ConfigurationError("sigma, d and V0 must all be positive")
    width0 = 4.0 * V0 / (math.pi * d * d * AVOGADRO)
    eta_center = width0 / (math.sqrt(2.0 * math.pi) * sigma)
    if eta_center > 1.0:
        raise ConfigurationError(
            f"peak fractional density {eta_center:.3g} exceeds 1; "
            "the layer model is unphysical for these parameters"
        )

    offsets = [0.0]
    widths = [width0]
    z = 0.0
    while True:
        z += width0 * math.exp(z * z / (2.0 * sigma * sigma))
        rel = math.exp(-z * z / (2.0 * sigma * sigma))
        if rel < eta_floor_rel:
            break
        offsets.append(z)
        widths.append(width0 / rel)

    layers = []
    for off, wid in zip(offsets, widths):
        rel = math.exp(-off * off / (2.0 * sigma * sigma))
        layers.append(Layer(z=z0 + off, eta=eta_center * rel, dz=wid))
        if off > 0.0:
            layers.append(Layer(z=z0 - off, eta=eta_center * rel, dz=wid))
    layers.sort(key=lambda layer: layer.z)
    return LayerStack(layers=tuple(layers), sigma=sigma, z0=z0)


def beer_attenuate(intensity, z_km: float, beta_e: float):
    """Beer's-law intensity attenuation I0 exp(-beta_e z)."""
    if z_km < 0.0:
        raise ValueError("path length must be >= 0")
    if beta_e < 0.0:
        raise ValueError("extinction coefficient must be >= 0")
    return intensity * math.exp(-beta_e * z_km)


@dataclass(frozen=True)
class BeerPath:
    """Atmospheric path before the first and after the last layer [km]."""

    z_in_km: float = 0.0
    z_out_km: float = 0.0
    beta_e_per_km: float = 0.55


def adiabatic_coherences(
    rho11,
    rho22,
    rho12,
    envelopes,
    detunings,
    chirp_rates,
    t,
    eps_div: float = EPS_DIV,
):
    """Excited-state coherences after adiabatic elimination.

    Parameters
    ----------
    rho11, rho22, rho12 : scalar or array
        Ground-manifold density-matrix elements.
    envelopes : tuple
        (pump, Stokes, probe, anti-Stokes) envelope values at ``t``.
    detunings : tuple
        (Delta_s, Delta_as).
    chirp_rates : tuple
        (a_p, a_s, a_pr) temporal chirp rates at ``t``.
    t : scalar or array
        Per-pulse local time entering the denominators.

    Returns
    -------
    (rho13, rho23, rho14, rho24) per

        rho13 = [W_p rho11 + W_s rho12] / (2 (D_s + a_p t))
        rho23 = [W_s rho22 + W_p rho21] / (2 (D_s + a_s t))
        rho14 = [W_as rho11 + W_pr rho12] / (2 D_as)
        rho24 = [W_pr rho22 + W_as rho21] / (2 (D_as + a_pr t))
    """
    t = np.asarray(t, dtype=float)
    om_p, om_s, om_pr, om_as = (np.asarray(e) for e in envelopes)
    delta_s, delta_as = detunings
    a_p, a_s, a_pr = (np.asarray(a) for a in chirp_rates)
    rho21 = np.conj(rho12)

    dens = {
        "pump": delta_s + a_p * t,
        "stokes": delta_s + a_s * t,
        "anti-Stokes": np.broadcast_to(np.asarray(float(delta_as)), t.shape),
        "probe": delta_as + a_pr * t,
    }
    for name, den in dens.items():
        small = np.abs(den) <= eps_div
        if np.any(small):
            bad = float(np.atleast_1d(t)[np.argmax(np.atleast_1d(small))])
            raise SingularDenominatorError(
                f"adiabatic-elimination denominator for the {name} transition "
                f"fell below {eps_div:g}",
                bad,
            )
    rho13 = (om_p * rho11 + om_s * rho12) / (2.0 * dens["pump"])
    rho23 = (om_s * rho22 + om_p * rho21) / (2.0 * dens["stokes"])
    rho14 = (om_as * rho11 + om_pr * rho12) / (2.0 * dens["anti-Stokes"])
    rho24 = (om_pr * rho22 + om_as * rho21) / (2.0 * dens["probe"])
    return rho13, rho23, rho14, rho24


@dataclass(frozen=True)
class FieldSet:
    """The four Rabi envelopes sampled on a shared uniform time grid.

    ``params`` keeps the incident-pulse description (chirp laws, timing,
    detunings); the envelope samples are what propagation modifies.
    """

    times: np.ndarray
    envelopes: np.ndarray   # (4, T): pump, Stokes, probe, anti-Stokes
    params: FourLevelCarsParams

    def __post_init__(self):
        if self.envelopes.shape != (4, self.times.shape[0]):
            raise ValueError("envelopes must have shape (4, len(times))")
        if not np.all(np.isfinite(self.envelopes)):
            raise ValueError("envelopes must be finite")

    @classmethod
    def from_params(cls, params: FourLevelCarsParams, times) -> "FieldSet":
        times = np.asarray(times, dtype=float)
        envelopes = np.stack(
            [
                params.pump.envelope(times),
                params.stokes.envelope(times),
                params.probe.envelope(times),
                params.antistokes.envelope(times),
            ]
        )
        return cls(times=times, envelopes=envelopes, params=params)

    @classmethod
    def default_grid(
        cls,
        params: FourLevelCarsParams,
        points_per_pulse: int = 4000,
        pad: float = 5.0,
    ) -> "FieldSet":
        """Grid spanning the train with ``pad`` stretched durations margin."""
        tau = max(params.pump.base.duration, params.stokes.base.duration)
        start = params.center_time - pad * tau
        stop = params.center_time + params.pump.span + pad * tau
        # points_per_pulse counts samples per train period (or per 10 tau for
        # a single pulse), keeping the step uniform across the whole train
        period = params.pump.period if params.pump.count > 1 else 10.0 * tau
        step = period / points_per_pulse
        n = int(math.ceil((stop - start) / step)) + 1
        times = start + step * np.arange(n)
        return cls.from_params(params, times)

    @property
    def carriers(self) -> np.ndarray:
        return np.array(
            [
                self.params.pump.base.carrier,
                self.params.stokes.base.carrier,
                self.params.probe.base.carrier,
                self.params.antistokes.base.carrier,
            ]
        )

    def antistokes_peak(self) -> float:
        return float(np.max(np.abs(self.envelopes[3])))


def _fine_grid(fields: FieldSet):
    """Static per-grid arrays on nodes+midpoints (fine index 2k = node k)."""
    t = fields.times
    fine = np.empty(2 * t.shape[0] - 1)
    fine[0::2] = t
    fine[1::2] = 0.5 * (t[:-1] + t[1:])
    params = fields.params
    t_loc = params.pump.local_time(fine)
    rate_p = params.pump.base.chirp_law.rate(t_loc)
    rate_s = params.stokes.base.chirp_law.rate(t_loc)
    rate_pr = params.probe.base.chirp_law.rate(t_loc)
    diag_p = rate_p * t_loc
    diag_s = rate_s * t_loc
    den_p = params.delta_s + diag_p
    den_s = params.delta_s + diag_s
    den_pr = params.delta_as + rate_pr * t_loc
    return fine, diag_p, diag_s, den_p, den_s, den_pr


def _check_denominators(fields: FieldSet, fine, den_p, den_s, den_pr):
    den_as = fields.params.delta_as
    for name, den in (
        ("pump", den_p),
        ("stokes", den_s),
        ("probe", den_pr),
        ("anti-Stokes", np.array([den_as])),
    ):
        # a sign change between samples means the denominator passed through
        # zero even if no sample landed inside the guard band
        small = np.abs(den) <= EPS_DIV
        small[1:] |= np.sign(den[1:]) != np.sign(den[:-1])
        if np.any(small):
            where = int(np.argmax(small))
            bad = float(fine[where]) if den.shape == fine.shape else 0.0
            raise SingularDenominatorError(
                f"Maxwell-equation denominator for the {name} field fell "
                f"below {EPS_DIV:g}",
                bad,
            )


def _layer_kernel_impl(
    env_fine,
    h,
    diag_p,
    diag_s,
    den_p,
    den_s,
    den_pr,
    den_as,
    delta_s,
    delta_as,
    delta2,
    coef,
    pop,
    coh,
    use_rates,
):
    """RK4 co-evolution of (rho, envelope corrections) over one layer.

    ``env_fine`` is (4, 2T-1) incident envelopes on nodes+midpoints; returns
    the output node envelopes (4, T), |rho12| at the nodes, and the final
    density matrix.
    """
    n_fine = env_fine.shape[1]
    n_nodes = (n_fine + 1) // 2
    n_steps = n_nodes - 1

    rho = np.zeros((4, 4), dtype=np.complex128)
    rho[0, 0] = 1.0
    dw = np.zeros(4)

    out_env = np.empty((4, n_nodes))
    out_abs12 = np.empty(n_nodes)

    ham = np.zeros((4, 4), dtype=np.complex128)
    k_rho = np.zeros((4, 4), dtype=np.complex128)
    acc_rho = np.zeros((4, 4), dtype=np.complex128)
    st_rho = np.zeros((4, 4), dtype=np.complex128)
    k_dw = np.zeros(4)
    acc_dw = np.zeros(4)
    st_dw = np.zeros(4)

    stage_off = (0, 1, 1, 2)
    stage_c = (0.0, 0.5, 0.5, 1.0)
    stage_w = (1.0, 2.0, 2.0, 1.0)

    for q in range(4):
        out_env[q, 0] = env_fine[q, 0]
    out_abs12[0] = abs(rho[0, 1])

    for step in range(n_steps):
        base = 2 * step
        for i in range(4):
            acc_dw[i] = 0.0
            for j in range(4):
                acc_rho[i, j] = 0.0

        for s in range(4):
            idx = base + stage_off[s]
            c = stage_c[s]
            for i in range(4):
                st_dw[i] = dw[i] + c * h * k_dw[i]
                for j in range(4):
                    st_rho[i, j] = rho[i, j] + c * h * k_rho[i, j]

            om_p = env_fine[0, idx] + st_dw[0]
            om_s = env_fine[1, idx] + st_dw[1]
            om_pr = env_fine[2, idx] + st_dw[2]
            om_as = env_fine[3, idx] + st_dw[3]

            ham[0, 0] = diag_p[idx]
            ham[1, 1] = diag_s[idx] - delta2
            ham[2, 2] = -delta_s
            ham[3, 3] = diag_p[idx] - delta_as
            ham[0, 2] = 0.5 * om_p
            ham[2, 0] = 0.5 * om_p
            ham[0, 3] = 0.5 * om_as
            ham[3, 0] = 0.5 * om_as
            ham[1, 2] = 0.5 * om_s
            ham[2, 1] = 0.5 * om_s
            ham[1, 3] = 0.5 * om_pr
            ham[3, 1] = 0.5 * om_pr

            for i in range(4):
                for j in range(4):
                    acc = 0.0 + 0.0j
                    for m in range(4):
                        acc += ham[i, m] * st_rho[m, j] - st_rho[i, m] * ham[m, j]
                    k_rho[i, j] = -1j * acc
            if use_rates:
                for i in range(4):
                    gain = 0.0
                    for m in range(4):
                        gain += pop[i, m] * st_rho[m, m].real
                    for j in range(4):
                        if i == j:
                            k_rho[i, i] += gain
                        else:
                            k_rho[i, j] -= coh[i, j] * st_rho[i, j]

            im12 = st_rho[0, 1].imag
            k_dw[0] = coef[0] * om_s * im12 / den_p[idx]
            k_dw[1] = coef[1] * om_p * im12 / den_s[idx]
            k_dw[2] = coef[2] * om_as * im12 / den_pr[idx]
            k_dw[3] = coef[3] * om_pr * im12 / den_as

            w = stage_w[s]
            for i in range(4):
                acc_dw[i] += w * k_dw[i]
                for j in range(4):
                    acc_rho[i, j] += w * k_rho[i, j]

        scale = h / 6.0
        for i in range(4):
            dw[i] += scale * acc_dw[i]
            for j in range(4):
                rho[i, j] += scale * acc_rho[i, j]

        node = step + 1
        for q in range(4):
            out_env[q, node] = env_fine[q, 2 * node] + dw[q]
        out_abs12[node] = abs(rho[0, 1])

    return out_env, out_abs12, rho


try:  # pragma: no cover - exercised implicitly wherever numba is installed
    from numba import njit

    _layer_kernel = njit(cache=True)(_layer_kernel_impl)
except ImportError:  # pragma: no cover
    _layer_kernel = _layer_kernel_impl


def _env_fine_from_nodes(envelopes: np.ndarray) -> np.ndarray:
    env_fine = np.empty((4, 2 * envelopes.shape[1] - 1))
    env_fine[:, 0::2] = envelopes
    env_fine[:, 1::2] = 0.5 * (envelopes[:, :-1] + envelopes[:, 1:])
    return env_fine


def _run_layer(fields, layer, medium, rates, static):
    fine, diag_p, diag_s, den_p, den_s, den_pr = static
    h = fields.times[1] - fields.times[0]
    carriers = fields.carriers
    coef = np.array(
        [
            -0.5 * layer.eta * medium.kappa[(1, 3)] * carriers[0],
            +0.5 * layer.eta * medium.kappa[(2, 3)] * carriers[1],
            +0.5 * layer.eta * medium.kappa[(2, 4)] * carriers[2],
            -0.5 * layer.eta * medium.kappa[(1, 4)] * carriers[3],
        ]
    )
    if rates is not None and not rates.is_zero():
        pop, coh = rates.coefficients(4)
        use_rates = True
    else:
        pop = np.zeros((4, 4))
        coh = np.zeros((4, 4))
        use_rates = False
    out_env, abs12, rho = _layer_kernel(
        _env_fine_from_nodes(fields.envelopes),
        float(h),
        diag_p,
        diag_s,
        den_p,
        den_s,
        den_pr,
        float(fields.params.delta_as),
        float(fields.params.delta_s),
        float(fields.params.delta_as),
        float(fields.params.two_photon_delta),
        coef,
        pop,
        coh,
        use_rates,
    )
    if not np.all(np.isfinite(out_env)):
        # a denominator passed the sampled guard but still amplified the
        # corrections beyond overflow; report it as an integration failure
        bad = int(np.argmax(~np.isfinite(out_env).all(axis=0)))
        raise IntegrationError(
            "field envelopes diverged inside a layer",
            step=bad,
            quantity="max |envelope|",
            value=float(np.nanmax(np.abs(out_env[np.isfinite(out_env)])))
            if np.isfinite(out_env).any()
            else math.inf,
        )
    return replace(fields, envelopes=out_env), abs12, rho


def scatter_layer(fields: FieldSet, layer: Layer, medium: MediumParams, rates=None):
    """Pass the fields through one layer; returns the updated FieldSet."""
    static = _fine_grid(fields)
    _check_denominators(fields, static[0], *static[3:])
    out, _, _ = _run_layer(fields, layer, medium, rates, static)
    return out


@dataclass(frozen=True)
class LayerRecord:
    index: int
    z: float
    eta: float
    antistokes_peak: float
    final_coherence: float
    max_coherence: float
    fields: "FieldSet | None" = None


@dataclass(frozen=True)
class PropagationResult:
    records: tuple
    fields: FieldSet


def propagate(
    fields: FieldSet,
    stack: LayerStack,
    medium: MediumParams,
    rates=None,
    record_every: int = 1,
    beer: BeerPath | None = None,
    keep_fields: bool = False,
) -> PropagationResult:
    """Scatter the fields through every layer of the stack in order.

    Records, for every ``record_every``-th layer (first and last always),
    the layer position, its density, the anti-Stokes envelope peak after the
    layer, and the molecular coherence |rho12| at the end of the time grid.
    With ``keep_fields`` each record also carries the full FieldSet leaving
    that layer (memory grows with the number of recorded layers).
    Beer's-law attenuation, when given, scales the field amplitudes once
    before the first layer and once after the last (sqrt of the intensity
    factor).
    """
    if len(stack) == 0:
        raise ValueError("layer stack is empty")
    if record_every < 1:
        raise ValueError("record_every must be >= 1")

    if beer is not None and beer.z_in_km > 0.0:
        factor = math.sqrt(
            beer_attenuate(1.0, beer.z_in_km, beer.beta_e_per_km)
        )
        fields = replace(fields, envelopes=fields.envelopes * factor)

    static = _fine_grid(fields)
    _check_denominators(fields, static[0], *static[3:])

    records = []
    last = len(stack) - 1
    for index, layer in enumerate(stack.layers):
        fields, abs12, _ = _run_layer(fields, layer, medium, rates, static)
        if index % record_every == 0 or index == last:
            records.append(
                LayerRecord(
                    index=index + 1,
                    z=layer.z,
                    eta=layer.eta,
                    antistokes_peak=fields.antistokes_peak(),
                    final_coherence=float(abs12[-1]),
                    max_coherence=float(np.max(abs12)),
                    fields=fields if keep_fields else None,
                )
            )

    if beer is not None and beer.z_out_km > 0.0:
        factor = math.sqrt(
            beer_attenuate(1.0, beer.z_out_km, beer.beta_e_per_km)
        )
        fields = replace(fields, envelopes=fields.envelopes * factor)

    return PropagationResult(records=tuple(records), fields=fields)
