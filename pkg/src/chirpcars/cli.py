"""The ``sim`` console script.

Every subcommand takes one JSON config document (see :mod:`chirpcars.config`)
and writes delimited outputs plus a ``manifest.json`` into the output
directory.  Floats are serialized with ``repr`` (shortest round-trip form),
so re-running the same config reproduces byte-identical CSVs; the manifest
echoes the normalized config to make that reproducible from the artifacts
alone.

Exit codes: 0 success, 2 configuration/schema violation (diagnostic names
the offending field path), 3 numerical singularity or integration failure,
4 I/O failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .config import (
    TRAJECTORY_SCENARIOS,
    build_phasefit_request,
    build_propagation,
    build_scan_request,
    build_trajectory,
    build_wigner,
    load_config,
    parse_config,
)
from .dynamics import evolve, ground_state
from .errors import (
    ChirpcarsError,
    ConfigurationError,
    SamplingError,
)
from .phasefit import evaluate_suite
from .propagation import propagate
from .scan import compare_models, scan2d

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4

_ALLOWED_SCENARIOS = {
    "run": TRAJECTORY_SCENARIOS,
    "scan": ("scan",),
    "compare": ("scan",),
    "propagate": ("propagate",),
    "wigner": ("wigner",),
    "phasefit": ("phasefit",),
}

_TRAJECTORY_HEADER = (
    "t",
    "rho11",
    "rho22",
    "rho33",
    "rho44",
    "re_rho12",
    "im_rho12",
    "abs_rho12",
)


def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def _write_csv(path: Path, header, rows) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(",".join(header) + "\n")
        for row in rows:
            handle.write(",".join(_fmt(value) for value in row) + "\n")


def _cmd_run(cfg, args, out_dir: Path):
    plan = build_trajectory(cfg)
    traj = evolve(
        plan.h_builder,
        ground_state(plan.dim),
        plan.grid,
        rates=plan.rates,
        record_every=plan.record_every,
    )
    populations = np.zeros((4, traj.times.size))
    for level in range(1, plan.dim + 1):
        populations[level - 1] = traj.population(level)
    rho12 = traj.matrix_element(1, 2)
    rows = zip(
        traj.times,
        populations[0],
        populations[1],
        populations[2],
        populations[3],
        rho12.real,
        rho12.imag,
        np.abs(rho12),
    )
    _write_csv(out_dir / "trajectory.csv", _TRAJECTORY_HEADER, rows)

    summary = dict(plan.description)
    for level in range(1, 5):
        summary[f"final_rho{level}{level}"] = float(populations[level - 1][-1])
    summary["final_abs_rho12"] = float(abs(rho12[-1]))
    summary["max_abs_rho12"] = float(np.max(np.abs(rho12)))
    if plan.dim >= 3:
        rho13 = traj.matrix_element(1, 3)
        summary["final_abs_rho13"] = float(abs(rho13[-1]))
    outputs = ["trajectory.csv"]
    if args.plot:
        from .plots import trajectory_figure

        trajectory_figure(traj, out_dir / "trajectory.png")
        outputs.append("trajectory.png")
    return outputs, summary


def _cmd_scan(cfg, args, out_dir: Path):
    req = build_scan_request(cfg)
    if req.model is None:
        raise ConfigurationError(
            "a scan needs params.model (compare runs both)",
            field_path="params.model",
        )
    result = scan2d(req.model, req.spec, threads=args.threads, **req.options)
    header = (req.spec.axis1.name, req.spec.axis2.name, result.observable)
    _write_csv(out_dir / "scan.csv", header, result.rows())

    finite = result.values[np.isfinite(result.values)]
    summary = {
        "model": result.model,
        "observable": result.observable,
        "cells": int(result.values.size),
        "failed_cells": len(result.failures),
        "min": float(finite.min()) if finite.size else None,
        "max": float(finite.max()) if finite.size else None,
        "scan_wall_time_s": result.wall_time_s,
    }
    outputs = ["scan.csv"]
    if args.plot:
        from .plots import scan_figure

        scan_figure(result, out_dir / "scan.png")
        outputs.append("scan.png")
    return outputs, summary


def _cmd_compare(cfg, args, out_dir: Path):
    req = build_scan_request(cfg)
    result = compare_models(
        req.spec,
        threads=args.threads,
        band_half_width=req.band_half_width,
        **req.options,
    )
    header = (
        req.spec.axis1.name,
        req.spec.axis2.name,
        "two_level",
        "four_level",
        "abs_diff",
    )
    rows = list(result.rows())
    rows.append(("max_diff_outside_band", "", "", "", result.max_diff_outside_band))
    rows.append(("max_diff_inside_band", "", "", "", result.max_diff_inside_band))
    _write_csv(out_dir / "compare.csv", header, rows)

    summary = {
        "observable": req.spec.observable,
        "band_half_width": result.band_half_width,
        "max_diff_outside_band": result.max_diff_outside_band,
        "max_diff_inside_band": result.max_diff_inside_band,
        "compare_wall_time_s": result.wall_time_s,
    }
    outputs = ["compare.csv"]
    if args.plot:
        from .plots import compare_figure

        compare_figure(result, out_dir / "compare.png")
        outputs.append("compare.png")
    return outputs, summary


def _cmd_propagate(cfg, args, out_dir: Path):
    plan = build_propagation(cfg)
    incident = plan.fields.envelopes.copy()
    result = propagate(
        plan.fields,
        plan.stack,
        plan.medium,
        rates=plan.rates,
        record_every=plan.record_every,
        beer=plan.beer,
        keep_fields=plan.keep_fields,
    )
    _write_csv(
        out_dir / "layers.csv",
        ("layer", "z", "eta", "antistokes_peak", "final_coherence",
         "max_coherence"),
        (
            (r.index, r.z, r.eta, r.antistokes_peak, r.final_coherence,
             r.max_coherence)
            for r in result.records
        ),
    )
    out = result.fields
    _write_csv(
        out_dir / "fields_out.csv",
        ("t", "pump", "stokes", "probe", "antistokes"),
        zip(out.times, *out.envelopes),
    )

    deltas = np.max(np.abs(out.envelopes - incident), axis=1)
    last = result.records[-1]
    summary = {
        "layers": len(plan.stack),
        "recorded_layers": len(result.records),
        "final_antistokes_peak": last.antistokes_peak,
        "final_coherence": last.final_coherence,
        "field_delta_max": {
            name: float(value)
            for name, value in zip(
                ("pump", "stokes", "probe", "antistokes"), deltas
            )
        },
    }
    outputs = ["layers.csv", "fields_out.csv"]
    if args.plot:
        from .plots import layers_figure

        layers_figure(result.records, out_dir / "layers.png")
        outputs.append("layers.png")
    return outputs, summary


def _cmd_wigner(cfg, args, out_dir: Path):
    plan = build_wigner(cfg)
    grid = plan.compute()
    rows = (
        (t, w, grid.values[i, j])
        for i, t in enumerate(grid.times)
        for j, w in enumerate(grid.omegas)
    )
    _write_csv(out_dir / "wigner.csv", ("t", "omega", "value"), rows)

    from .dressed import ridge_frequencies

    ridge = ridge_frequencies(grid)
    _write_csv(out_dir / "ridge.csv", ("t", "ridge_omega"), zip(grid.times, ridge))

    summary = {
        "method": plan.method,
        "times": int(grid.times.size),
        "omegas": int(grid.omegas.size),
        "max_value": float(grid.values.max()),
    }
    outputs = ["wigner.csv", "ridge.csv"]
    if args.plot:
        from .plots import wigner_figure

        wigner_figure(grid, out_dir / "wigner.png")
        outputs.append("wigner.png")
    return outputs, summary


def _cmd_phasefit(cfg, args, out_dir: Path):
    req = build_phasefit_request(cfg)
    report = evaluate_suite(
        ranges=req.ranges,
        per_kind=req.per_kind,
        seed=req.seed,
        noise=req.noise,
        threads=args.threads,
    )
    with open(out_dir / "suite_report.json", "w", encoding="utf-8") as handle:
        json.dump(report.to_dict(), handle, indent=2)
        handle.write("\n")

    kinds = tuple(report.confusion)
    _write_csv(
        out_dir / "confusion.csv",
        ("true_kind",) + kinds,
        (
            (true,) + tuple(report.confusion[true][pred] for pred in kinds)
            for true in kinds
        ),
    )
    summary = {
        "accuracy": report.accuracy,
        "overall_rms": report.overall_rms,
        "count": report.count,
        "suite_wall_time_s": report.wall_time_s,
    }
    outputs = ["suite_report.json", "confusion.csv"]
    if args.plot:
        from .plots import confusion_figure

        confusion_figure(report, out_dir / "confusion.png")
        outputs.append("confusion.png")
    return outputs, summary


_HANDLERS = {
    "run": _cmd_run,
    "scan": _cmd_scan,
    "compare": _cmd_compare,
    "propagate": _cmd_propagate,
    "wigner": _cmd_wigner,
    "phasefit": _cmd_phasefit,
}

_HELP = {
    "run": "single density-matrix trajectory (ccars2/ccars4/stirap3/stirap4/fstirap)",
    "scan": "2-D observable map over coupling peak and chirp ratio",
    "compare": "two-level vs four-level observable difference map",
    "propagate": "multilayer propagation with anti-Stokes buildup",
    "wigner": "Wigner-Ville time-frequency map of one pulse",
    "phasefit": "synthetic phase-extraction suite",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sim",
        description="Chirped-pulse Raman coherence simulations.",
    )
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__}"
    )
    subparsers = parser.add_subparsers(dest="command", required=True)
    for name, handler_help in _HELP.items():
        sub = subparsers.add_parser(name, help=handler_help)
        sub.add_argument("config", help="JSON config document")
        sub.add_argument(
            "--out",
            metavar="DIR",
            default=None,
            help="output directory (default: config out_dir, else '.')",
        )
        sub.add_argument(
            "--threads",
            type=int,
            default=1,
            metavar="N",
            help="worker threads for scans and phase-fit batches",
        )
        sub.add_argument(
            "--si",
            action="store_true",
            help="dimensional config fields are in THz / fs / fs^2 / THz/ps",
        )
        sub.add_argument(
            "--plot",
            action="store_true",
            help="also render PNG figures next to the CSV outputs",
        )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(format="%(levelname)s %(name)s: %(message)s")
    started = time.perf_counter()
    try:
        document = load_config(args.config)
        cfg = parse_config(document, si=args.si)
        if cfg.scenario not in _ALLOWED_SCENARIOS[args.command]:
            raise ConfigurationError(
                f"scenario {cfg.scenario!r} cannot be run with "
                f"'sim {args.command}'",
                field_path="scenario",
            )
        out_dir = Path(args.out or cfg.out_dir or ".")
        out_dir.mkdir(parents=True, exist_ok=True)
        outputs, summary = _HANDLERS[args.command](cfg, args, out_dir)

        manifest = {
            "version": __version__,
            "command": args.command,
            "scenario": cfg.scenario,
            "config": cfg.echo,
            "wall_time_s": time.perf_counter() - started,
            "outputs": outputs,
            "summary": summary,
        }
        with open(out_dir / "manifest.json", "w", encoding="utf-8") as handle:
            json.dump(manifest, handle, indent=2)
            handle.write("\n")
    except (ConfigurationError, SamplingError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ChirpcarsError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO

    names = ", ".join(outputs + ["manifest.json"])
    print(f"{args.command}: wrote {names} to {out_dir}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
