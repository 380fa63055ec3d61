"""Configuration documents: validation, unit conversion, scenario builders.

A run is described by one JSON document with a versioned envelope::

    {
      "schema_version": 1,
      "scenario": "ccars2",
      "params": { ... scenario-specific block ... }
    }

Validation is two-stage — envelope first, then the scenario block — so that
error diagnostics carry the dotted path of the offending field (exit code 2
in the CLI).  Unknown keys are rejected everywhere.

With ``"si_units": true`` in the document (or ``--si`` on the command line)
the dimensional fields are read in laboratory units and converted once, at
parse time: frequencies, Rabi peaks, detunings and relaxation rates in THz,
times in fs, spectral chirps in fs^2, temporal chirp rates in THz/ps.
Medium geometry (meters, m^3/mol, Debye, 1/km) is in laboratory units in
either mode.  The physics modules never see SI values; the parsed config
echoed into the run manifest is always in internal units, so re-running a
manifest's config reproduces the outputs without the flag.
"""

from __future__ import annotations

import copy
import json
import math
from dataclasses import dataclass

import numpy as np
from jsonschema import Draft202012Validator

from . import units
from .dressed import wigner_closed_form, wigner_numeric
from .dynamics import RelaxationRates
from .errors import ConfigurationError
from .hamiltonians import (
    ChirpedStirap4Params,
    FourLevelCarsParams,
    StirapParams,
    SuperEffectiveParams,
    h_fstirap,
    h_four_level,
    h_stirap3,
    h_stirap4,
    h_super_effective,
)
from .propagation import (
    BeerPath,
    FieldSet,
    MediumParams,
    build_layers,
)
from .pulses import (
    CCarsProbeChirp,
    CCarsPumpChirp,
    CCarsStokesChirp,
    ChirpedPulse,
    FStirapEnvelopePair,
    RoofChirp,
    chirped_duration,
)
from .scan import OBSERVABLES, ScanAxis, ScanSpec

__all__ = [
    "SCHEMA_VERSION",
    "SCENARIOS",
    "RunConfig",
    "TrajectoryPlan",
    "PropagationPlan",
    "WignerPlan",
    "ScanRequest",
    "PhasefitRequest",
    "load_config",
    "parse_config",
    "build_trajectory",
    "build_propagation",
    "build_wigner",
    "build_scan_request",
    "build_phasefit_request",
]

SCHEMA_VERSION = 1

TRAJECTORY_SCENARIOS = ("ccars2", "ccars4", "stirap3", "stirap4", "fstirap")
SCENARIOS = TRAJECTORY_SCENARIOS + ("propagate", "wigner", "phasefit", "scan")

#: Default integration step for the trajectory scenarios.
DEFAULT_STEP = 0.05
#: Stretched durations of margin either side of the driving pulses.
SPAN_FACTOR = 4.5

_NUMBER = {"type": "number"}
_POSITIVE = {"type": "number", "exclusiveMinimum": 0}
_NON_NEGATIVE = {"type": "number", "minimum": 0}

_GRID = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "step": _POSITIVE,
        "half_span": _POSITIVE,
        "record_every": {"type": "integer", "minimum": 1},
    },
}

_RATE_TABLE = {
    "type": "object",
    "additionalProperties": False,
    "patternProperties": {"^[1-4][1-4]$": _NON_NEGATIVE},
}

_RATES = {
    "type": "object",
    "additionalProperties": False,
    "properties": {"gamma": _RATE_TABLE, "dephasing": _RATE_TABLE},
}

_CARRIERS = {
    "type": "array",
    "items": _NON_NEGATIVE,
    "minItems": 4,
    "maxItems": 4,
}


def _axis_schema(name: str) -> dict:
    return {
        "type": "object",
        "additionalProperties": False,
        "required": ["name", "min", "max", "count"],
        "properties": {
            "name": {"const": name},
            "min": _NUMBER,
            "max": _NUMBER,
            "count": {"type": "integer", "minimum": 2},
        },
    }


_TOP_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "additionalProperties": False,
    "required": ["schema_version", "scenario", "params"],
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "scenario": {"enum": list(SCENARIOS)},
        "si_units": {"type": "boolean"},
        "out_dir": {"type": "string"},
        "params": {"type": "object"},
    },
}

_FIELDS_BLOCK = {
    "type": "object",
    "additionalProperties": False,
    "required": ["omega_p_peak", "tau0", "delta_s", "delta_as"],
    "properties": {
        "scheme": {"enum": ["ccars", "transform_limited"]},
        "omega_p_peak": _NON_NEGATIVE,
        "tau0": _POSITIVE,
        "chirp_ratio": _NUMBER,
        "spectral_chirp": _NUMBER,
        "delta_s": _NUMBER,
        "delta_as": _NUMBER,
        "two_photon_delta": _NUMBER,
        "balanced": {"type": "boolean"},
        "period": _NON_NEGATIVE,
        "count": {"type": "integer", "minimum": 1},
        "carriers": _CARRIERS,
        "center_time": _NUMBER,
        "points_per_pulse": {"type": "integer", "minimum": 16},
        "pad": _POSITIVE,
    },
}

_PARAM_SCHEMAS = {
    "ccars2": {
        "type": "object",
        "additionalProperties": False,
        "required": ["omega3_peak", "tau0"],
        "properties": {
            "omega3_peak": _NON_NEGATIVE,
            "tau0": _POSITIVE,
            "chirp_ratio": _NUMBER,
            "spectral_chirp": _NUMBER,
            "two_photon_delta": _NUMBER,
            "variant": {"enum": ["control", "opposite"]},
            "center_time": _NUMBER,
            "grid": _GRID,
            "rates": _RATES,
        },
    },
    "ccars4": {
        "type": "object",
        "additionalProperties": False,
        "required": ["omega_p_peak", "tau0", "delta_s", "delta_as"],
        "properties": {
            "omega_p_peak": _NON_NEGATIVE,
            "tau0": _POSITIVE,
            "chirp_ratio": _NUMBER,
            "spectral_chirp": _NUMBER,
            "delta_s": _NUMBER,
            "delta_as": _NUMBER,
            "two_photon_delta": _NUMBER,
            "balanced": {"type": "boolean"},
            "period": _NON_NEGATIVE,
            "count": {"type": "integer", "minimum": 1},
            "carriers": _CARRIERS,
            "center_time": _NUMBER,
            "transform_limited": {"type": "boolean"},
            "grid": _GRID,
            "rates": _RATES,
        },
    },
    "stirap3": {
        "type": "object",
        "additionalProperties": False,
        "required": ["omega_p_peak", "omega_s_peak", "tau", "t_pump", "t_stokes"],
        "properties": {
            "omega_p_peak": _NON_NEGATIVE,
            "omega_s_peak": _NON_NEGATIVE,
            "tau": _POSITIVE,
            "t_pump": _NUMBER,
            "t_stokes": _NUMBER,
            "delta_one": _NUMBER,
            "delta_two": _NUMBER,
            "pump_chirp": _NUMBER,
            "stokes_chirp": _NUMBER,
            "grid": _GRID,
            "rates": _RATES,
        },
    },
    "stirap4": {
        "type": "object",
        "additionalProperties": False,
        "required": [
            "omega_p_peak",
            "omega_s_peak",
            "tau",
            "t_pump",
            "t_stokes",
            "splitting",
        ],
        "properties": {
            "omega_p_peak": _NON_NEGATIVE,
            "omega_s_peak": _NON_NEGATIVE,
            "tau": _POSITIVE,
            "t_pump": _NUMBER,
            "t_stokes": _NUMBER,
            "splitting": _NUMBER,
            "delta_one": _NUMBER,
            "delta_two": _NUMBER,
            "pump_chirp": _NUMBER,
            "stokes_chirp": _NUMBER,
            "grid": _GRID,
            "rates": _RATES,
        },
    },
    "fstirap": {
        "type": "object",
        "additionalProperties": False,
        "required": ["omega0", "mixing", "t_p", "tau"],
        "properties": {
            "omega0": _NON_NEGATIVE,
            "mixing": _NUMBER,
            "t_p": _NUMBER,
            "tau": _POSITIVE,
            "delta_one": _NUMBER,
            "delta_two": _NUMBER,
            "grid": _GRID,
            "rates": _RATES,
        },
    },
    "propagate": {
        "type": "object",
        "additionalProperties": False,
        "required": ["fields", "layers"],
        "properties": {
            "fields": _FIELDS_BLOCK,
            "medium": {
                "type": "object",
                "additionalProperties": False,
                "properties": {
                    "mu_debye": _POSITIVE,
                    "diameter": _POSITIVE,
                    "molar_volume": _POSITIVE,
                    "extinction": _NON_NEGATIVE,
                },
            },
            "layers": {
                "type": "object",
                "additionalProperties": False,
                "required": ["sigma"],
                "properties": {"sigma": _POSITIVE, "z0": _NUMBER},
            },
            "beer": {
                "type": "object",
                "additionalProperties": False,
                "properties": {
                    "z_in_km": _NON_NEGATIVE,
                    "z_out_km": _NON_NEGATIVE,
                    "beta_e_per_km": _NON_NEGATIVE,
                },
            },
            "record_every": {"type": "integer", "minimum": 1},
            "keep_fields": {"type": "boolean"},
            "rates": _RATES,
        },
    },
    "wigner": {
        "type": "object",
        "additionalProperties": False,
        "required": ["pulse", "times", "omegas"],
        "properties": {
            "pulse": {
                "type": "object",
                "additionalProperties": False,
                "required": ["carrier", "tau0"],
                "properties": {
                    "amplitude": _NON_NEGATIVE,
                    "carrier": _NON_NEGATIVE,
                    "tau0": _POSITIVE,
                    "spectral_chirp": _NUMBER,
                    "center_time": _NUMBER,
                    "law": {
                        "type": "object",
                        "additionalProperties": False,
                        "required": ["kind"],
                        "properties": {
                            "kind": {
                                "enum": [
                                    "linear",
                                    "roof",
                                    "ccars_pump",
                                    "ccars_stokes",
                                    "ccars_probe",
                                ]
                            },
                            "rate_before": _NUMBER,
                            "rate_after": _NUMBER,
                            "stokes_rate": _NUMBER,
                        },
                    },
                },
            },
            "times": {
                "type": "object",
                "additionalProperties": False,
                "required": ["min", "max", "count"],
                "properties": {
                    "min": _NUMBER,
                    "max": _NUMBER,
                    "count": {"type": "integer", "minimum": 2},
                },
            },
            "omegas": {
                "type": "object",
                "additionalProperties": False,
                "required": ["min", "max", "count"],
                "properties": {
                    "min": _NUMBER,
                    "max": _NUMBER,
                    "count": {"type": "integer", "minimum": 2},
                },
            },
            "method": {"enum": ["closed_form", "numeric"]},
            "numeric": {
                "type": "object",
                "additionalProperties": False,
                "properties": {
                    "half_window": _POSITIVE,
                    "sample_dt": _POSITIVE,
                },
            },
        },
    },
    "phasefit": {
        "type": "object",
        "additionalProperties": False,
        "properties": {
            "per_kind": {"type": "integer", "minimum": 1},
            "seed": {"type": "integer", "minimum": 0},
            "noise": _NON_NEGATIVE,
            "ranges_file": {"type": "string"},
        },
    },
    "scan": {
        "type": "object",
        "additionalProperties": False,
        "required": ["axis1", "axis2"],
        "properties": {
            "model": {"enum": ["two_level", "four_level"]},
            "axis1": _axis_schema("omega3_peak"),
            "axis2": _axis_schema("chirp_ratio"),
            "observable": {"enum": list(OBSERVABLES)},
            "tau0": _POSITIVE,
            "two_photon_delta": _NUMBER,
            "big_delta": _NUMBER,
            "step": _POSITIVE,
            "band_half_width": _POSITIVE,
            "rates": _RATES,
        },
    },
}

# SI-mode dimension of each dotted params path; a trailing "*" matches any
# final key (relaxation-rate tables).  Everything unlisted is dimensionless
# or already in laboratory units (geometry).
_GRID_SI = {"grid.step": "time", "grid.half_span": "time"}
_RATES_SI = {"rates.gamma.*": "frequency", "rates.dephasing.*": "frequency"}
_FIELDS_SI = {
    "omega_p_peak": "frequency",
    "tau0": "time",
    "spectral_chirp": "spectral_chirp",
    "delta_s": "frequency",
    "delta_as": "frequency",
    "two_photon_delta": "frequency",
    "period": "time",
    "carriers": "frequency",
    "center_time": "time",
}

_SI_KINDS = {
    "ccars2": {
        "omega3_peak": "frequency",
        "tau0": "time",
        "spectral_chirp": "spectral_chirp",
        "two_photon_delta": "frequency",
        "center_time": "time",
        **_GRID_SI,
        **_RATES_SI,
    },
    "ccars4": {**_FIELDS_SI, **_GRID_SI, **_RATES_SI},
    "stirap3": {
        "omega_p_peak": "frequency",
        "omega_s_peak": "frequency",
        "tau": "time",
        "t_pump": "time",
        "t_stokes": "time",
        "delta_one": "frequency",
        "delta_two": "frequency",
        "pump_chirp": "temporal_chirp",
        "stokes_chirp": "temporal_chirp",
        **_GRID_SI,
        **_RATES_SI,
    },
    "fstirap": {
        "omega0": "frequency",
        "mixing": None,
        "t_p": "time",
        "tau": "time",
        "delta_one": "frequency",
        "delta_two": "frequency",
        **_GRID_SI,
        **_RATES_SI,
    },
    "propagate": {
        **{f"fields.{key}": kind for key, kind in _FIELDS_SI.items()},
        **_RATES_SI,
    },
    "wigner": {
        "pulse.amplitude": "frequency",
        "pulse.carrier": "frequency",
        "pulse.tau0": "time",
        "pulse.spectral_chirp": "spectral_chirp",
        "pulse.center_time": "time",
        "pulse.law.rate_before": "temporal_chirp",
        "pulse.law.rate_after": "temporal_chirp",
        "pulse.law.stokes_rate": "temporal_chirp",
        "times.min": "time",
        "times.max": "time",
        "omegas.min": "frequency",
        "omegas.max": "frequency",
        "numeric.half_window": "time",
        "numeric.sample_dt": "time",
    },
    "phasefit": {},
    "scan": {
        "axis1.min": "frequency",
        "axis1.max": "frequency",
        "tau0": "time",
        "two_photon_delta": "frequency",
        "big_delta": "frequency",
        "step": "time",
        **_RATES_SI,
    },
}
_SI_KINDS["stirap4"] = {**_SI_KINDS["stirap3"], "splitting": "frequency"}

_CONVERTERS = {
    "frequency": units.freq_thz,
    "time": units.time_fs,
    "temporal_chirp": units.chirp_thz_per_ps,
    "spectral_chirp": units.spectral_chirp_fs2,
}


@dataclass(frozen=True)
class RunConfig:
    """A validated configuration, parameters in internal units.

    ``echo`` is the full normalized document (SI already applied, flag
    dropped): writing it back out and re-parsing reproduces the run.
    """

    scenario: str
    params: dict
    out_dir: str | None
    echo: dict


@dataclass(frozen=True)
class TrajectoryPlan:
    """Everything a single density-matrix run needs."""

    h_builder: object
    dim: int
    grid: np.ndarray
    rates: RelaxationRates | None
    record_every: int
    description: dict


@dataclass(frozen=True)
class PropagationPlan:
    fields: FieldSet
    stack: object
    medium: MediumParams
    rates: RelaxationRates | None
    record_every: int
    beer: BeerPath | None
    keep_fields: bool


@dataclass(frozen=True)
class WignerPlan:
    pulse: ChirpedPulse
    times: np.ndarray
    omegas: np.ndarray
    method: str
    numeric_options: dict

    def compute(self):
        if self.method == "numeric":
            return wigner_numeric(self.pulse, self.times, self.omegas,
                                  **self.numeric_options)
        return wigner_closed_form(self.pulse, self.times, self.omegas)


@dataclass(frozen=True)
class ScanRequest:
    model: str | None
    spec: ScanSpec
    options: dict
    band_half_width: float


@dataclass(frozen=True)
class PhasefitRequest:
    ranges: dict | None
    per_kind: int | None
    seed: int | None
    noise: float


def load_config(path) -> dict:
    """Read a JSON config document; malformed JSON is a configuration error."""
    with open(path, "r", encoding="utf-8") as handle:
        try:
            return json.load(handle)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"invalid JSON: {exc}") from exc


def _validate(instance, schema, prefix: str = "") -> None:
    validator = Draft202012Validator(schema)
    error = next(iter(sorted(validator.iter_errors(instance), key=str)), None)
    if error is not None:
        path = ".".join(str(part) for part in error.absolute_path)
        if prefix:
            path = f"{prefix}.{path}" if path else prefix
        raise ConfigurationError(error.message, field_path=path or None)


def _require_one_chirp(block: dict, prefix: str) -> None:
    present = [key for key in ("chirp_ratio", "spectral_chirp") if key in block]
    if len(present) != 1:
        raise ConfigurationError(
            "exactly one of chirp_ratio and spectral_chirp is required",
            field_path=f"{prefix}.chirp_ratio",
        )


def _check_semantics(scenario: str, params: dict) -> None:
    if scenario == "ccars2":
        _require_one_chirp(params, "params")
    elif scenario == "ccars4":
        if params.get("transform_limited"):
            if "chirp_ratio" in params or "spectral_chirp" in params:
                raise ConfigurationError(
                    "transform-limited fields take no chirp",
                    field_path="params.transform_limited",
                )
        else:
            _require_one_chirp(params, "params")
    elif scenario == "propagate":
        fields = params["fields"]
        if fields.get("scheme", "ccars") == "transform_limited":
            if "chirp_ratio" in fields or "spectral_chirp" in fields:
                raise ConfigurationError(
                    "transform-limited fields take no chirp",
                    field_path="params.fields.scheme",
                )
        else:
            _require_one_chirp(fields, "params.fields")
    elif scenario == "wigner":
        law = params["pulse"].get("law", {"kind": "linear"})
        kind = law["kind"]
        needed = {
            "linear": (),
            "roof": ("rate_before", "rate_after"),
            "ccars_pump": ("stokes_rate",),
            "ccars_stokes": ("stokes_rate",),
            "ccars_probe": ("stokes_rate",),
        }[kind]
        for key in needed:
            if key not in law:
                raise ConfigurationError(
                    f"law kind {kind!r} requires {key}",
                    field_path=f"params.pulse.law.{key}",
                )
        for axis in ("times", "omegas"):
            if not params[axis]["max"] > params[axis]["min"]:
                raise ConfigurationError(
                    "max must exceed min", field_path=f"params.{axis}.max"
                )
        if params.get("numeric") and params.get("method", "closed_form") != "numeric":
            raise ConfigurationError(
                "numeric options require method = numeric",
                field_path="params.numeric",
            )
    elif scenario == "scan":
        for axis in ("axis1", "axis2"):
            if not params[axis]["max"] > params[axis]["min"]:
                raise ConfigurationError(
                    "max must exceed min", field_path=f"params.{axis}.max"
                )


def _convert_block(block, table: dict, prefix: str = ""):
    converted = {}
    for key, value in block.items():
        path = f"{prefix}{key}"
        kind = table.get(path)
        if kind is None and path not in table:
            kind = table.get(f"{prefix}*")
        if isinstance(value, dict):
            converted[key] = _convert_block(value, table, prefix=f"{path}.")
        elif kind in _CONVERTERS:
            conv = _CONVERTERS[kind]
            if isinstance(value, list):
                converted[key] = [conv(item) for item in value]
            else:
                converted[key] = conv(value)
        else:
            converted[key] = value
    return converted


def parse_config(document: dict, si: bool = False) -> RunConfig:
    """Validate a config document and normalize it to internal units."""
    _validate(document, _TOP_SCHEMA)
    scenario = document["scenario"]
    params = copy.deepcopy(document["params"])
    _validate(params, _PARAM_SCHEMAS[scenario], prefix="params")
    _check_semantics(scenario, params)

    if si or document.get("si_units", False):
        params = _convert_block(params, _SI_KINDS[scenario])

    echo = {
        "schema_version": SCHEMA_VERSION,
        "scenario": scenario,
        "params": params,
    }
    out_dir = document.get("out_dir")
    if out_dir is not None:
        echo["out_dir"] = out_dir
    return RunConfig(scenario=scenario, params=params, out_dir=out_dir, echo=echo)


def _build_rates(block: dict | None) -> RelaxationRates | None:
    if not block:
        return None
    def table(name):
        return {
            (int(key[0]), int(key[1])): value
            for key, value in block.get(name, {}).items()
        }
    try:
        return RelaxationRates(gamma=table("gamma"), dephasing=table("dephasing"))
    except ValueError as exc:
        raise ConfigurationError(str(exc), field_path="params.rates") from exc


def _grid_array(start: float, stop: float, step: float) -> np.ndarray:
    n = int(math.ceil((stop - start) / step - 1e-12))
    return start + step * np.arange(n + 1)


def _alpha_prime(block: dict) -> float:
    if "chirp_ratio" in block:
        return block["chirp_ratio"] * block["tau0"] ** 2
    return block["spectral_chirp"]


def build_trajectory(cfg: RunConfig) -> TrajectoryPlan:
    """Assemble the Hamiltonian, grid and rates of a single run."""
    if cfg.scenario not in TRAJECTORY_SCENARIOS:
        raise ConfigurationError(
            f"scenario {cfg.scenario!r} is not a trajectory run",
            field_path="scenario",
        )
    p = cfg.params
    grid_cfg = p.get("grid", {})
    step = grid_cfg.get("step", DEFAULT_STEP)
    record_every = grid_cfg.get("record_every", 1)
    rates = _build_rates(p.get("rates"))

    if cfg.scenario == "ccars2":
        alpha_prime = _alpha_prime(p)
        factory = (
            SuperEffectiveParams.opposite_chirp
            if p.get("variant", "control") == "opposite"
            else SuperEffectiveParams.ccars
        )
        se = factory(
            p["omega3_peak"],
            p["tau0"],
            alpha_prime,
            p.get("two_photon_delta", 0.0),
            p.get("center_time", 0.0),
        )
        tau = chirped_duration(alpha_prime, p["tau0"])
        center = p.get("center_time", 0.0)
        half = grid_cfg.get("half_span", SPAN_FACTOR * tau)
        return TrajectoryPlan(
            h_builder=lambda t: h_super_effective(se, t),
            dim=2,
            grid=_grid_array(center - half, center + half, step),
            rates=rates,
            record_every=record_every,
            description={"variant": p.get("variant", "control"),
                         "stretched_duration": tau},
        )

    if cfg.scenario == "ccars4":
        kwargs = dict(
            two_photon_delta=p.get("two_photon_delta", 0.0),
            center_time=p.get("center_time", 0.0),
            period=p.get("period", 0.0),
            count=p.get("count", 1),
        )
        if "carriers" in p:
            kwargs["carriers"] = tuple(p["carriers"])
        if p.get("transform_limited"):
            params = FourLevelCarsParams.transform_limited(
                p["omega_p_peak"], p["tau0"], p["delta_s"], p["delta_as"],
                **kwargs,
            )
            tau = p["tau0"]
        else:
            alpha_prime = _alpha_prime(p)
            params = FourLevelCarsParams.ccars(
                p["omega_p_peak"], p["tau0"], alpha_prime,
                p["delta_s"], p["delta_as"],
                balanced=p.get("balanced", True),
                **kwargs,
            )
            tau = chirped_duration(alpha_prime, p["tau0"])
        center = p.get("center_time", 0.0)
        span = params.pump.span
        half = grid_cfg.get("half_span", SPAN_FACTOR * tau)
        return TrajectoryPlan(
            h_builder=lambda t: h_four_level(params, t),
            dim=4,
            grid=_grid_array(center - half, center + span + half, step),
            rates=rates,
            record_every=record_every,
            description={"stretched_duration": tau, "train_span": span},
        )

    if cfg.scenario in ("stirap3", "stirap4"):
        stirap = StirapParams(
            p["omega_p_peak"],
            p["omega_s_peak"],
            p["tau"],
            p["t_pump"],
            p["t_stokes"],
            delta_one=p.get("delta_one", 0.0),
            delta_two=p.get("delta_two", 0.0),
            pump_chirp=p.get("pump_chirp", 0.0),
            stokes_chirp=p.get("stokes_chirp", 0.0),
        )
        center = 0.5 * (p["t_pump"] + p["t_stokes"])
        half = grid_cfg.get(
            "half_span",
            SPAN_FACTOR * p["tau"] + abs(p["t_pump"] - p["t_stokes"]),
        )
        if cfg.scenario == "stirap3":
            h_builder = lambda t: h_stirap3(stirap, t)  # noqa: E731
            dim = 3
            description = {}
        else:
            params4 = ChirpedStirap4Params(stirap, splitting=p["splitting"])
            h_builder = lambda t: h_stirap4(params4, t)  # noqa: E731
            dim = 4
            description = {"splitting": p["splitting"]}
        return TrajectoryPlan(
            h_builder=h_builder,
            dim=dim,
            grid=_grid_array(center - half, center + half, step),
            rates=rates,
            record_every=record_every,
            description=description,
        )

    pair = FStirapEnvelopePair(p["omega0"], p["mixing"], p["t_p"], p["tau"])
    half = grid_cfg.get("half_span", SPAN_FACTOR * p["tau"] + 2.0 * abs(p["t_p"]))
    return TrajectoryPlan(
        h_builder=lambda t: h_fstirap(
            pair, t, p.get("delta_one", 0.0), p.get("delta_two", 0.0)
        ),
        dim=3,
        grid=_grid_array(-half, half, step),
        rates=rates,
        record_every=record_every,
        description={"mixing": p["mixing"]},
    )


def build_propagation(cfg: RunConfig) -> PropagationPlan:
    if cfg.scenario != "propagate":
        raise ConfigurationError(
            f"scenario {cfg.scenario!r} is not a propagation run",
            field_path="scenario",
        )
    p = cfg.params
    f = p["fields"]
    kwargs = dict(
        two_photon_delta=f.get("two_photon_delta", 0.0),
        center_time=f.get("center_time", 0.0),
        period=f.get("period", 0.0),
        count=f.get("count", 1),
    )
    if "carriers" in f:
        kwargs["carriers"] = tuple(f["carriers"])
    if f.get("scheme", "ccars") == "transform_limited":
        params = FourLevelCarsParams.transform_limited(
            f["omega_p_peak"], f["tau0"], f["delta_s"], f["delta_as"], **kwargs
        )
    else:
        params = FourLevelCarsParams.ccars(
            f["omega_p_peak"], f["tau0"], _alpha_prime(f),
            f["delta_s"], f["delta_as"],
            balanced=f.get("balanced", True),
            **kwargs,
        )
    fields = FieldSet.default_grid(
        params,
        points_per_pulse=f.get("points_per_pulse", 4000),
        pad=f.get("pad", 5.0),
    )

    medium = MediumParams.methanol_like(**p.get("medium", {}))
    layers = p["layers"]
    stack = build_layers(
        layers["sigma"], layers.get("z0", 0.0),
        medium.diameter, medium.molar_volume,
    )
    beer_cfg = p.get("beer")
    beer = (
        BeerPath(
            z_in_km=beer_cfg.get("z_in_km", 0.0),
            z_out_km=beer_cfg.get("z_out_km", 0.0),
            beta_e_per_km=beer_cfg.get("beta_e_per_km", medium.extinction),
        )
        if beer_cfg
        else None
    )
    return PropagationPlan(
        fields=fields,
        stack=stack,
        medium=medium,
        rates=_build_rates(p.get("rates")),
        record_every=p.get("record_every", 1),
        beer=beer,
        keep_fields=p.get("keep_fields", False),
    )


def _chirp_law(pulse_cfg: dict):
    law = pulse_cfg.get("law")
    if law is None or law["kind"] == "linear":
        return None
    if law["kind"] == "roof":
        return RoofChirp(law["rate_before"], law["rate_after"])
    cls = {
        "ccars_pump": CCarsPumpChirp,
        "ccars_stokes": CCarsStokesChirp,
        "ccars_probe": CCarsProbeChirp,
    }[law["kind"]]
    return cls(law["stokes_rate"])


def build_wigner(cfg: RunConfig) -> WignerPlan:
    if cfg.scenario != "wigner":
        raise ConfigurationError(
            f"scenario {cfg.scenario!r} is not a Wigner map",
            field_path="scenario",
        )
    p = cfg.params
    pc = p["pulse"]
    pulse = ChirpedPulse(
        pc.get("amplitude", 1.0),
        pc["carrier"],
        pc["tau0"],
        pc.get("spectral_chirp", 0.0),
        pc.get("center_time", 0.0),
        _chirp_law(pc),
    )
    times = np.linspace(p["times"]["min"], p["times"]["max"], p["times"]["count"])
    omegas = np.linspace(
        p["omegas"]["min"], p["omegas"]["max"], p["omegas"]["count"]
    )
    return WignerPlan(
        pulse=pulse,
        times=times,
        omegas=omegas,
        method=p.get("method", "closed_form"),
        numeric_options=dict(p.get("numeric", {})),
    )


def build_scan_request(cfg: RunConfig) -> ScanRequest:
    if cfg.scenario != "scan":
        raise ConfigurationError(
            f"scenario {cfg.scenario!r} is not a scan",
            field_path="scenario",
        )
    p = cfg.params

    def axis(block):
        return ScanAxis(
            name=block["name"], low=block["min"], high=block["max"],
            count=block["count"],
        )

    spec = ScanSpec(
        axis1=axis(p["axis1"]),
        axis2=axis(p["axis2"]),
        observable=p.get("observable", "final_coherence"),
    )
    options = dict(
        tau0=p.get("tau0", 10.0),
        two_photon_delta=p.get("two_photon_delta", 0.0),
        big_delta=p.get("big_delta", 1.0),
        step=p.get("step", 0.02),
        rates=_build_rates(p.get("rates")),
    )
    return ScanRequest(
        model=p.get("model"),
        spec=spec,
        options=options,
        band_half_width=p.get("band_half_width", 1.0),
    )


def build_phasefit_request(cfg: RunConfig) -> PhasefitRequest:
    if cfg.scenario != "phasefit":
        raise ConfigurationError(
            f"scenario {cfg.scenario!r} is not a phase-fit batch",
            field_path="scenario",
        )
    p = cfg.params
    ranges = None
    if "ranges_file" in p:
        with open(p["ranges_file"], "r", encoding="utf-8") as handle:
            ranges = json.load(handle)
    return PhasefitRequest(
        ranges=ranges,
        per_kind=p.get("per_kind"),
        seed=p.get("seed"),
        noise=p.get("noise", 0.0),
    )
