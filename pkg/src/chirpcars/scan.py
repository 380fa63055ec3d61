"""Two-dimensional parameter scans of the coherence maps.

Grids sweep the transform-limited effective coupling peak W3(0) against the
chirp ratio a_s'/tau0^2 and record a final-state observable per cell, either
with the super-effective two-level reduction or with the exact four-level
system under the control chirping scheme (balanced amplitudes, so both models
see the same physics).  All cells are integrated together as one batched RK4
sweep over a shared time grid — per-cell Hamiltonians are assembled
vectorised, which is what makes a 40x40 comparison of both models a
sub-minute job instead of thousands of scalar runs.

The third observable, ``antistokes_peak``, runs each cell's balanced pulse
set through a single scattering layer of the canonical cloud and records the
generated anti-Stokes envelope peak; it is a per-cell job rather than a
batched one and only exists for the four-level model.

Cell failures (non-finite or invariant-violating end states) never abort a
scan: the cell value becomes NaN and a line goes to the ``chirpcars.scan``
logger.
"""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .dynamics import RelaxationRates, ground_state, relaxation_derivative
from .errors import ChirpcarsError, ConfigurationError
from .pulses import spectral_to_temporal_chirp

__all__ = [
    "ScanAxis",
    "ScanSpec",
    "ScanResult",
    "CompareResult",
    "scan2d",
    "compare_models",
    "MODELS",
    "OBSERVABLES",
]

logger = logging.getLogger("chirpcars.scan")

MODELS = ("two_level", "four_level")
OBSERVABLES = ("final_coherence", "final_rho22", "antistokes_peak")

#: Shared integration grid extends this many stretched durations either side
#: of the pulse center.
SPAN_FACTOR = 4.5


@dataclass(frozen=True)
class ScanAxis:
    name: str
    low: float
    high: float
    count: int

    def __post_init__(self):
        if self.count < 2:
            raise ConfigurationError(f"axis {self.name}: count must be >= 2")
        if not (self.high > self.low):
            raise ConfigurationError(f"axis {self.name}: high must exceed low")

    def values(self) -> np.ndarray:
        return np.linspace(self.low, self.high, self.count)


@dataclass(frozen=True)
class ScanSpec:
    """Axes and observable of a 2-D scan.

    ``axis1`` sweeps the transform-limited coupling peak W3(0), ``axis2`` the
    dimensionless chirp ratio a_s'/tau0^2.
    """

    axis1: ScanAxis
    axis2: ScanAxis
    observable: str = "final_coherence"

    def __post_init__(self):
        if self.observable not in OBSERVABLES:
            raise ConfigurationError(
                f"observable must be one of {OBSERVABLES}, got {self.observable!r}"
            )


@dataclass(frozen=True)
class ScanResult:
    axis1: np.ndarray
    axis2: np.ndarray
    values: np.ndarray
    observable: str
    model: str
    failures: tuple
    wall_time_s: float

    def rows(self):
        """One (axis1, axis2, value) tuple per cell, axis1-major order."""
        out = []
        for i, a in enumerate(self.axis1):
            for j, b in enumerate(self.axis2):
                out.append((float(a), float(b), float(self.values[i, j])))
        return out


@dataclass(frozen=True)
class CompareResult:
    """Per-cell |two-level - four-level| observable difference."""

    axis1: np.ndarray
    axis2: np.ndarray
    two_level: np.ndarray
    four_level: np.ndarray
    difference: np.ndarray
    max_diff_outside_band: float
    max_diff_inside_band: float
    band_half_width: float
    wall_time_s: float

    def rows(self):
        out = []
        for i, a in enumerate(self.axis1):
            for j, b in enumerate(self.axis2):
                out.append(
                    (
                        float(a),
                        float(b),
                        float(self.two_level[i, j]),
                        float(self.four_level[i, j]),
                        float(self.difference[i, j]),
                    )
                )
        return out


def _cell_constants(spec: ScanSpec, tau0: float):
    """Per-cell arrays shared by both model builders (flattened C-order)."""
    peaks, ratios = np.meshgrid(
        spec.axis1.values(), spec.axis2.values(), indexing="ij"
    )
    peaks = peaks.ravel()
    x = ratios.ravel()
    stretch = np.sqrt(1.0 + x * x)
    tau = tau0 * stretch
    alpha = np.array(
        [spectral_to_temporal_chirp(xi * tau0**2, tau0) for xi in x]
    )
    return peaks, x, stretch, tau, alpha


def _two_level_stage(peaks, stretch, tau, alpha, delta, center):
    """Stage-Hamiltonian closure for the batched two-level control scheme."""
    w3_realized = peaks / stretch
    inv_tau_sq = 1.0 / (tau * tau)

    def stage(t: float) -> np.ndarray:
        t_rel = t - center
        rate = 2.0 * alpha if t_rel <= 0.0 else np.zeros_like(alpha)
        a = delta - rate * t_rel
        w3 = w3_realized * np.exp(-(t_rel * t_rel) * inv_tau_sq)
        h = np.zeros((peaks.size, 2, 2), dtype=complex)
        h[:, 0, 0] = 0.5 * a
        h[:, 1, 1] = -0.5 * a
        h[:, 0, 1] = h[:, 1, 0] = w3
        return h

    return stage


def _four_level_stage(peaks, x, stretch, tau, alpha, delta, big_delta, center):
    """Stage closure for the exact four-level system, balanced amplitudes.

    The scan axis is the transform-limited coupling peak, so the pump peak is
    recovered from W3(0) = Omega_p0^2 / (4 sqrt(2) Delta) and the Stokes and
    probe peaks are Omega_p0/sqrt(2) (AC-Stark balance); every field carries
    the chirp-stretched envelope with the (1+x^2)^(-1/4) amplitude reduction.
    """
    omega_p0 = np.sqrt(4.0 * math.sqrt(2.0) * big_delta * peaks)
    reduction = (1.0 + x * x) ** -0.25
    peak_p = omega_p0 * reduction
    peak_side = peak_p / math.sqrt(2.0)
    half_inv_tau_sq = 0.5 / (tau * tau)

    def stage(t: float) -> np.ndarray:
        t_rel = t - center
        env = np.exp(-(t_rel * t_rel) * half_inv_tau_sq)
        om_p = peak_p * env
        om_side = peak_side * env
        alpha_p = -alpha if t_rel <= 0.0 else alpha
        h = np.zeros((peaks.size, 4, 4), dtype=complex)
        h[:, 0, 0] = alpha_p * t_rel
        h[:, 1, 1] = alpha * t_rel - delta
        h[:, 2, 2] = -big_delta
        h[:, 3, 3] = alpha_p * t_rel - big_delta
        h[:, 0, 2] = h[:, 2, 0] = 0.5 * om_p
        h[:, 1, 2] = h[:, 2, 1] = 0.5 * om_side
        h[:, 1, 3] = h[:, 3, 1] = 0.5 * om_side
        return h

    return stage


def _rk4_batch(stage, rho, t_start, n_steps, h, rates):
    def derivative(hmat, state):
        k = hmat @ state
        k -= state @ hmat
        k *= -1j
        if rates is not None:
            k += relaxation_derivative(state, rates)
        return k

    # diverging cells are handled by the NaN policy downstream, so the
    # overflow they produce on the way is not worth a warning storm
    with np.errstate(over="ignore", invalid="ignore"):
        for step in range(n_steps):
            t = t_start + step * h
            h1 = stage(t)
            h2 = stage(t + 0.5 * h)
            h4 = stage(t + h)
            k1 = derivative(h1, rho)
            k2 = derivative(h2, rho + (0.5 * h) * k1)
            k3 = derivative(h2, rho + (0.5 * h) * k2)
            k4 = derivative(h4, rho + h * k3)
            rho += (h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
    return rho


def _integrate(
    model, constants, delta, big_delta, step, rates, center, half_span
):
    """Batched RK4 over one chunk of cells; the grid is fixed by the caller
    (global max duration) so chunking never changes per-cell arithmetic."""
    peaks, x, stretch, tau, alpha = constants
    if model == "two_level":
        stage = _two_level_stage(peaks, stretch, tau, alpha, delta, center)
        dim = 2
    else:
        stage = _four_level_stage(
            peaks, x, stretch, tau, alpha, delta, big_delta, center
        )
        dim = 4

    n_steps = max(1, int(math.ceil(2.0 * half_span / step)))
    h = 2.0 * half_span / n_steps
    rho = np.broadcast_to(
        ground_state(dim), (peaks.size, dim, dim)
    ).copy()
    return _rk4_batch(stage, rho, center - half_span, n_steps, h, rates)


def _extract(observable: str, rho: np.ndarray) -> np.ndarray:
    if observable == "final_coherence":
        return np.abs(rho[:, 0, 1])
    return rho[:, 1, 1].real


def _canonical_layer():
    """Densest layer of the canonical cloud: one scattering event."""
    from .propagation import MOLAR_VOLUME_IDEAL_GAS, build_layers

    stack = build_layers(0.2, 0.0, 1e-10, MOLAR_VOLUME_IDEAL_GAS)
    return max(stack.layers, key=lambda layer: layer.eta)


def _antistokes_cell(
    peak, ratio, tau0, delta, big_delta, center, rates, eta, step
):
    from .hamiltonians import FourLevelCarsParams
    from .propagation import (
        FieldSet,
        Layer,
        LayerStack,
        MediumParams,
        scatter_layer,
    )

    omega_p0 = math.sqrt(4.0 * math.sqrt(2.0) * big_delta * peak)
    params = FourLevelCarsParams.ccars(
        omega_p0,
        tau0,
        ratio * tau0**2,
        big_delta,
        big_delta,
        two_photon_delta=delta,
        center_time=center,
    )
    # the scan's step governs this path too: the layer kernel runs on a
    # single-pulse grid of 10 tau, so convert step into samples per period
    tau = tau0 * math.sqrt(1.0 + ratio * ratio)
    points_per_pulse = max(16, int(math.ceil(10.0 * tau / step)))
    fields = FieldSet.default_grid(params, points_per_pulse=points_per_pulse)
    layer = Layer(z=0.0, eta=eta, dz=0.0)
    out = scatter_layer(
        fields, layer, MediumParams.methanol_like(), rates=rates
    )
    return out.antistokes_peak()


def _validate_cells(rho: np.ndarray) -> np.ndarray:
    """Boolean mask of cells whose end state violates density-matrix basics."""
    finite = np.isfinite(rho).all(axis=(1, 2))
    trace = np.einsum("bii->b", rho)
    trace_ok = np.abs(trace - 1.0) <= 1e-6
    herm_ok = (
        np.max(np.abs(rho - np.conj(np.swapaxes(rho, 1, 2))), axis=(1, 2)) <= 1e-8
    )
    return ~(finite & trace_ok & herm_ok)


def _antistokes_scan(spec, tau0, delta, big_delta, rates, center, threads, step):
    peaks, x, _, _, _ = _cell_constants(spec, tau0)
    eta = _canonical_layer().eta
    values = np.full(peaks.size, np.nan)
    reasons = {}

    def job(flat: int) -> float:
        return _antistokes_cell(
            float(peaks[flat]), float(x[flat]), tau0, delta, big_delta,
            center, rates, eta, step,
        )

    def record(flat: int, run):
        try:
            values[flat] = run()
        except ChirpcarsError as exc:
            reasons[flat] = str(exc)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [pool.submit(job, flat) for flat in range(peaks.size)]
        for flat, future in enumerate(futures):
            record(flat, future.result)
    else:
        for flat in range(peaks.size):
            record(flat, lambda flat=flat: job(flat))
    return values, reasons


def scan2d(
    model: str,
    spec: ScanSpec,
    *,
    tau0: float = 10.0,
    two_photon_delta: float = 0.0,
    big_delta: float = 1.0,
    step: float = 0.02,
    rates: RelaxationRates | None = None,
    center_time: float = 0.0,
    threads: int = 1,
) -> ScanResult:
    """Sweep the grid and return the observable per cell.

    Failed cells carry NaN and are listed in ``failures`` as
    (i, j, axis1, axis2, reason); the scan always completes.  ``threads``
    splits the work into index-ordered chunks whose results are identical to
    the single-threaded ones (the shared time grid is fixed up front).
    """
    started = time.perf_counter()
    if model not in MODELS:
        raise ConfigurationError(f"model must be one of {MODELS}, got {model!r}")
    if model == "four_level" and big_delta == 0.0:
        raise ConfigurationError(
            "four-level scan needs a nonzero one-photon detuning"
        )
    if spec.observable == "antistokes_peak" and model != "four_level":
        raise ConfigurationError(
            "antistokes_peak is only defined for the four-level model"
        )
    threads = max(1, int(threads))
    n1, n2 = spec.axis1.count, spec.axis2.count
    a1 = spec.axis1.values()
    a2 = spec.axis2.values()
    failures = []

    if spec.observable == "antistokes_peak":
        values, reasons = _antistokes_scan(
            spec, tau0, two_photon_delta, big_delta, rates, center_time,
            threads, step,
        )
        for flat, reason in sorted(reasons.items()):
            i, j = divmod(flat, n2)
            logger.warning(
                "cell (%d, %d) at (%g, %g) failed: %s", i, j, a1[i], a2[j], reason
            )
            failures.append((i, j, float(a1[i]), float(a2[j]), reason))
        return ScanResult(
            axis1=a1,
            axis2=a2,
            values=values.reshape(n1, n2),
            observable=spec.observable,
            model=model,
            failures=tuple(failures),
            wall_time_s=time.perf_counter() - started,
        )

    try:
        constants = _cell_constants(spec, tau0)
        half_span = SPAN_FACTOR * float(np.max(constants[3]))
        if threads > 1:
            chunk_ids = np.array_split(np.arange(constants[0].size), threads)
            chunks = [
                tuple(arr[ids] for arr in constants)
                for ids in chunk_ids
                if ids.size
            ]
            with ThreadPoolExecutor(max_workers=threads) as pool:
                parts = list(
                    pool.map(
                        lambda c: _integrate(
                            model, c, two_photon_delta, big_delta, step,
                            rates, center_time, half_span,
                        ),
                        chunks,
                    )
                )
            rho = np.concatenate(parts, axis=0)
        else:
            rho = _integrate(
                model, constants, two_photon_delta, big_delta, step,
                rates, center_time, half_span,
            )
        values = _extract(spec.observable, rho)
        bad = _validate_cells(rho)
    except ConfigurationError:
        raise
    except Exception as exc:  # noqa: BLE001 - cell isolation by contract
        logger.error("scan batch failed: %s", exc)
        values = np.full(n1 * n2, np.nan)
        bad = np.zeros(n1 * n2, dtype=bool)
        failures.append((-1, -1, math.nan, math.nan, str(exc)))

    if bad.any():
        for flat in np.flatnonzero(bad):
            i, j = divmod(int(flat), n2)
            logger.warning(
                "cell (%d, %d) at (%g, %g) violated state invariants; NaN",
                i,
                j,
                a1[i],
                a2[j],
            )
            failures.append((i, j, float(a1[i]), float(a2[j]), "invalid end state"))
        values = values.copy()
        values[bad] = np.nan

    return ScanResult(
        axis1=a1,
        axis2=a2,
        values=values.reshape(n1, n2),
        observable=spec.observable,
        model=model,
        failures=tuple(failures),
        wall_time_s=time.perf_counter() - started,
    )


def compare_models(
    spec: ScanSpec,
    *,
    tau0: float = 10.0,
    two_photon_delta: float = 0.0,
    big_delta: float = 1.0,
    step: float = 0.02,
    rates: RelaxationRates | None = None,
    center_time: float = 0.0,
    band_half_width: float = 1.0,
    threads: int = 1,
) -> CompareResult:
    """Run both models on the same grid and difference the observables.

    The adiabatic elimination is only trusted away from vanishing chirp, so
    the summary separates the max difference outside |a_s'/tau0^2| <
    ``band_half_width`` (the model-equivalence claim) from the max inside
    (reported, expected to be larger).
    """
    if spec.observable == "antistokes_peak":
        raise ConfigurationError(
            "model comparison needs an observable both models define"
        )
    started = time.perf_counter()
    kwargs = dict(
        tau0=tau0,
        two_photon_delta=two_photon_delta,
        big_delta=big_delta,
        step=step,
        rates=rates,
        center_time=center_time,
        threads=threads,
    )
    two = scan2d("two_level", spec, **kwargs)
    four = scan2d("four_level", spec, **kwargs)
    diff = np.abs(two.values - four.values)

    inside = np.abs(spec.axis2.values()) < band_half_width
    def _region_max(mask_cols: np.ndarray) -> float:
        if not mask_cols.any():
            return float("nan")
        region = diff[:, mask_cols]
        return float(np.nanmax(region)) if np.isfinite(region).any() else float("nan")

    return CompareResult(
        axis1=two.axis1,
        axis2=two.axis2,
        two_level=two.values,
        four_level=four.values,
        difference=diff,
        max_diff_outside_band=_region_max(~inside),
        max_diff_inside_band=_region_max(inside),
        band_half_width=band_half_width,
        wall_time_s=time.perf_counter() - started,
    )
