"""Optional matplotlib rendering of the CLI outputs.

Imported lazily by the ``--plot`` flag only, so matplotlib stays out of the
default dependency path of a run.  Every function writes one PNG next to the
delimited output it mirrors and closes its figure.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

__all__ = [
    "trajectory_figure",
    "scan_figure",
    "compare_figure",
    "layers_figure",
    "wigner_figure",
    "confusion_figure",
]


def trajectory_figure(traj, path) -> None:
    """Populations and |rho12| of one run over time."""
    fig, (top, bottom) = plt.subplots(2, 1, sharex=True, figsize=(7, 5))
    for level in range(1, traj.dim + 1):
        top.plot(traj.times, traj.population(level), label=rf"$\rho_{{{level}{level}}}$")
    top.set_ylabel("population")
    top.legend(loc="best", fontsize="small")
    rho12 = traj.matrix_element(1, 2)
    bottom.plot(traj.times, np.abs(rho12), color="k")
    bottom.set_xlabel("time")
    bottom.set_ylabel(r"$|\rho_{12}|$")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def _mesh(ax, axis1, axis2, values, label):
    mesh = ax.pcolormesh(axis2, axis1, values, shading="nearest")
    ax.set_xlabel("chirp ratio")
    ax.set_ylabel("coupling peak")
    ax.figure.colorbar(mesh, ax=ax, label=label)


def scan_figure(result, path) -> None:
    """Heatmap of one scan (axis1 vertical, axis2 horizontal)."""
    fig, ax = plt.subplots(figsize=(6, 4.5))
    _mesh(ax, result.axis1, result.axis2, result.values, result.observable)
    ax.set_title(f"{result.model} {result.observable}")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def compare_figure(result, path) -> None:
    """Both model maps and their absolute difference, side by side."""
    fig, axes = plt.subplots(1, 3, figsize=(14, 4))
    for ax, values, label in zip(
        axes,
        (result.two_level, result.four_level, result.difference),
        ("two-level", "four-level", "|difference|"),
    ):
        _mesh(ax, result.axis1, result.axis2, values, label)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def layers_figure(records, path) -> None:
    """Anti-Stokes growth and coherence survival across the layer stack."""
    index = [r.index for r in records]
    fig, ax = plt.subplots(figsize=(6.5, 4.5))
    ax.semilogy(index, [r.antistokes_peak for r in records],
                marker=".", color="tab:blue", label="anti-Stokes peak")
    ax.set_xlabel("layer")
    ax.set_ylabel("anti-Stokes envelope peak", color="tab:blue")
    twin = ax.twinx()
    twin.plot(index, [r.final_coherence for r in records],
              color="tab:red", label=r"final $|\rho_{12}|$")
    twin.set_ylabel(r"final $|\rho_{12}|$", color="tab:red")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def wigner_figure(grid, path) -> None:
    """Time-frequency map with the ridge overlaid."""
    from .dressed import ridge_frequencies

    fig, ax = plt.subplots(figsize=(6.5, 4.5))
    mesh = ax.pcolormesh(grid.times, grid.omegas, grid.values.T,
                         shading="nearest")
    ax.plot(grid.times, ridge_frequencies(grid), color="w", lw=0.8)
    ax.set_xlabel("time")
    ax.set_ylabel("frequency")
    fig.colorbar(mesh, ax=ax, label="W(t, w)")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def confusion_figure(report, path) -> None:
    """Confusion matrix of the phase-shape classification suite."""
    kinds = tuple(report.confusion)
    matrix = np.array(
        [[report.confusion[true][pred] for pred in kinds] for true in kinds]
    )
    fig, ax = plt.subplots(figsize=(4.5, 4))
    image = ax.imshow(matrix, cmap="Blues")
    ax.set_xticks(range(len(kinds)), kinds)
    ax.set_yticks(range(len(kinds)), kinds)
    ax.set_xlabel("predicted")
    ax.set_ylabel("true")
    for i in range(len(kinds)):
        for j in range(len(kinds)):
            ax.text(j, i, str(matrix[i, j]), ha="center", va="center",
                    color="w" if matrix[i, j] > matrix.max() / 2 else "k")
    fig.colorbar(image, ax=ax)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
