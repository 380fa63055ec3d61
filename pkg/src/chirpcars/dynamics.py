"""Density-matrix propagation: i rho' = [H, rho] plus relaxation.

The integrator is fixed-step classical Runge-Kutta (RK4) with the Hamiltonian
sampled in vectorized chunks, so a run is bit-reproducible for a given grid.
Relaxation enters additively inside the derivative; positivity, Hermiticity
and trace are monitored during the run and an :class:`IntegrationError` is
raised when a tolerance is breached (violations signal step-size problems and
must surface, not be projected away).

Rate conventions: ``gamma[(i, j)]`` is the population decay rate from level i
to level j (1-based) and ``dephasing[(i, j)]`` a pure dephasing rate on the
i-j coherence.  The coherence damping coefficients follow the ten-line rate
structure used throughout (including the gamma_41/2 contribution to the 1-3
coherence and the gamma_23/2 slot in the 2-4 line); population flow involves
only the downward rates, which conserves the trace exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import IntegrationError

__all__ = [
    "RelaxationRates",
    "Trajectory",
    "evolve",
    "relaxation_derivative",
    "coherence",
    "final_state_summary",
    "ground_state",
    "validate_density_matrix",
]

_GAMMA_KEYS = {(2, 1), (3, 1), (3, 2), (4, 1), (4, 2), (2, 3)}
_DEPHASING_KEYS = {(2, 1), (3, 1), (3, 2), (4, 1), (4, 2), (4, 3)}


class RelaxationRates:
    """Population decay and pure-dephasing rates for up to four levels.

    Parameters
    ----------
    gamma : mapping, optional
        ``{(i, j): rate}`` population decay i -> j.  Allowed keys: the five
        downward pairs plus the formal (2, 3) slot, which damps only the 2-4
        coherence and never moves population.
    dephasing : mapping, optional
        ``{(i, j): rate}`` pure dephasing of the i-j coherence (i > j).
    """

    def __init__(self, gamma=None, dephasing=None):
        gamma = dict(gamma or {})
        dephasing = dict(dephasing or {})
        for name, table, allowed in (
            ("gamma", gamma, _GAMMA_KEYS),
            ("dephasing", dephasing, _DEPHASING_KEYS),
        ):
            for key, rate in table.items():
                if tuple(key) not in allowed:
                    raise ValueError(f"unsupported {name} key {key!r}")
                if rate < 0.0:
                    raise ValueError(f"{name}[{key!r}] must be >= 0")
        self.gamma = gamma
        self.dephasing = dephasing
        self._coefficients = {}

    def is_zero(self) -> bool:
        return not any(self.gamma.values()) and not any(self.dephasing.values())

    def _rate(self, table, i, j, dim):
        if i > dim or j > dim:
            return 0.0
        return table.get((i, j), 0.0)

    def coefficients(self, dim: int):
        """(population flow matrix, coherence damping matrix) for ``dim``."""
        if dim not in self._coefficients:
            if dim not in (2, 3, 4):
                raise ValueError("dim must be 2, 3 or 4")

            def g(i, j):
                return self._rate(self.gamma, i, j, dim)

            def d(i, j):
                return self._rate(self.dephasing, i, j, dim)

            pop = np.zeros((dim, dim))
            pop[0, 1] = g(2, 1)
            pop[1, 1] = -g(2, 1)
            if dim >= 3:
                pop[0, 2] = g(3, 1)
                pop[1, 2] = g(3, 2)
                pop[2, 2] = -(g(3, 1) + g(3, 2))
            if dim == 4:
                pop[0, 3] = g(4, 1)
                pop[1, 3] = g(4, 2)
                pop[3, 3] = -(g(4, 1) + g(4, 2))

            coh = np.zeros((dim, dim))
            coh[0, 1] = 0.5 * g(2, 1) + d(2, 1)
            if dim >= 3:
                coh[0, 2] = (
                    0.5 * (g(3, 1) + g(3, 2) + g(2, 1) + g(4, 1)) + d(3, 1)
                )
                coh[1, 2] = (
                    0.5 * (g(3, 1) + g(3, 2) + g(2, 1) + g(4, 2)) + d(3, 2)
                )
            if dim == 4:
                coh[0, 3] = (
                    0.5 * (g(4, 1) + g(4, 2) + g(2, 1) + g(3, 1)) + d(4, 1)
                )
                coh[1, 3] = (
                    0.5 * (g(4, 1) + g(4, 2) + g(2, 1) + g(2, 3)) + d(4, 2)
                )
                coh[2, 3] = d(4, 3)
            coh = coh + coh.T
            self._coefficients[dim] = (pop, coh)
        return self._coefficients[dim]


def relaxation_derivative(rho, rates: RelaxationRates):
    """Relaxation contribution to d(rho)/dt; supports batched (..., N, N)."""
    rho = np.asarray(rho)
    dim = rho.shape[-1]
    pop, coh = rates.coefficients(dim)
    out = -coh * rho
    diag = np.diagonal(rho, axis1=-2, axis2=-1)
    idx = np.arange(dim)
    out[..., idx, idx] = diag @ pop.T
    return out


@dataclass(frozen=True)
class Trajectory:
    """Recorded density-matrix history on a strictly increasing grid."""

    times: np.ndarray
    states: np.ndarray
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.times.shape[0] != self.states.shape[0]:
            raise ValueError("times and states lengths differ")
        if self.times.shape[0] == 0:
            raise ValueError("trajectory is empty")
        if np.any(np.diff(self.times) <= 0.0):
            raise ValueError("time grid must be strictly increasing")

    @property
    def dim(self) -> int:
        return self.states.shape[-1]

    @property
    def final(self) -> np.ndarray:
        return self.states[-1]

    def population(self, level: int) -> np.ndarray:
        """Time series of rho_ii for 1-based ``level``."""
        return self.states[:, level - 1, level - 1].real

    def matrix_element(self, i: int, j: int) -> np.ndarray:
        return self.states[:, i - 1, j - 1]


def coherence(traj: Trajectory, i: int, j: int):
    """(|rho_ij|, Im rho_ij) time series for 1-based indices."""
    series = traj.matrix_element(i, j)
    return np.abs(series), series.imag


def final_state_summary(traj: Trajectory):
    """(populations, coherences) at the final step.

    Populations are the real diagonal; coherences a dict keyed by 1-based
    upper-triangle index pairs.
    """
    rho = traj.final
    dim = rho.shape[0]
    populations = np.diagonal(rho).real.copy()
    coherences = {
        (i + 1, j + 1): rho[i, j] for i in range(dim) for j in range(i + 1, dim)
    }
    return populations, coherences


def ground_state(dim: int) -> np.ndarray:
    """Density matrix with all population in the lowest level."""
    rho = np.zeros((dim, dim), dtype=complex)
    rho[0, 0] = 1.0
    return rho


def validate_density_matrix(rho, atol: float = 1e-8) -> None:
    """Raise ValueError unless rho is a valid density matrix."""
    rho = np.asarray(rho)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError("density matrix must be square")
    if rho.shape[0] not in (2, 3, 4):
        raise ValueError("dim must be 2, 3 or 4")
    if np.max(np.abs(rho - rho.conj().T)) > atol:
        raise ValueError("density matrix is not Hermitian")
    if abs(np.trace(rho).real - 1.0) > atol or abs(np.trace(rho).imag) > atol:
        raise ValueError("density matrix trace must be 1")
    if np.linalg.eigvalsh(rho).min() < -atol:
        raise ValueError("density matrix has a negative eigenvalue")


def _check_invariants(rho, step):
    herm = float(np.max(np.abs(rho - rho.conj().T)))
    if herm > 1e-10:
        raise IntegrationError(
            "Hermiticity breached during evolution", step, "hermiticity", herm
        )
    trace_err = abs(complex(np.trace(rho)) - 1.0)
    if trace_err > 1e-8:
        raise IntegrationError(
            "trace drifted during evolution", step, "trace", trace_err
        )
    eig_min = float(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)).min())
    if eig_min < -1e-8:
        raise IntegrationError(
            "negative population during evolution", step, "positivity", eig_min
        )


def evolve(
    h_builder,
    rho0,
    grid,
    rates: RelaxationRates | None = None,
    record_every: int = 1,
    check_every: int = 500,
    chunk: int = 1024,
    metadata: dict | None = None,
) -> Trajectory:
    """Propagate ``rho0`` over a uniform time ``grid``.

    Parameters
    ----------
    h_builder : callable
        Maps a 1-D time array to a stack of Hamiltonians (T, N, N).
    rho0 : ndarray
        Initial density matrix; validated up front.
    grid : ndarray
        Uniform, strictly increasing times; rho is stepped from grid[0] to
        grid[-1] and recorded every ``record_every`` grid points (the final
        point is always recorded).
    rates : RelaxationRates, optional
        Added to the commutator inside the same derivative evaluation.
    check_every : int
        Invariant-check cadence in steps.
    chunk : int
        Number of RK4 steps whose stage Hamiltonians are sampled per builder
        call.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.shape[0] < 2:
        raise ValueError("grid must contain at least two times")
    steps = np.diff(grid)
    h = steps[0]
    if np.any(steps <= 0.0) or np.max(np.abs(steps - h)) > 1e-9 * abs(h):
        raise ValueError("grid must be uniform and strictly increasing")
    if record_every < 1:
        raise ValueError("record_every must be >= 1")
    validate_density_matrix(np.asarray(rho0, dtype=complex))

    rho = np.asarray(rho0, dtype=complex).copy()
    dim = rho.shape[0]
    use_rates = rates is not None and not rates.is_zero()
    if use_rates:
        rates.coefficients(dim)

    n_steps = grid.shape[0] - 1
    record_idx = list(range(0, grid.shape[0], record_every))
    if record_idx[-1] != n_steps:
        record_idx.append(n_steps)
    record_set = set(record_idx)
    recorded = [rho.copy()] if 0 in record_set else []
    recorded_t = [grid[0]] if 0 in record_set else []

    def rhs(h_mat, state):
        d = -1j * (h_mat @ state - state @ h_mat)
        if use_rates:
            d = d + relaxation_derivative(state, rates)
        return d

    done = 0
    while done < n_steps:
        m = min(chunk, n_steps - done)
        t0 = grid[done : done + m + 1]
        mids = 0.5 * (t0[:-1] + t0[1:])
        h_nodes = np.asarray(h_builder(t0))
        h_mids = np.asarray(h_builder(mids))
        for k in range(m):
            ha, hm, hb = h_nodes[k], h_mids[k], h_nodes[k + 1]
            k1 = rhs(ha, rho)
            k2 = rhs(hm, rho + 0.5 * h * k1)
            k3 = rhs(hm, rho + 0.5 * h * k2)
            k4 = rhs(hb, rho + h * k3)
            rho = rho + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            step = done + k + 1
            if step % check_every == 0 or step == n_steps:
                _check_invariants(rho, step)
            if step in record_set:
                recorded.append(rho.copy())
                recorded_t.append(grid[step])
        done += m

    return Trajectory(
        times=np.asarray(recorded_t),
        states=np.asarray(recorded),
        metadata=dict(metadata or {}),
    )
