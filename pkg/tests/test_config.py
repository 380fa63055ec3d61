"""Config documents: schema diagnostics, SI conversion, scenario builders."""

import copy
import json

import numpy as np
import pytest

from chirpcars.config import (
    DEFAULT_STEP,
    SCENARIOS,
    SPAN_FACTOR,
    TRAJECTORY_SCENARIOS,
    build_phasefit_request,
    build_propagation,
    build_scan_request,
    build_trajectory,
    build_wigner,
    load_config,
    parse_config,
)
from chirpcars.errors import ConfigurationError
from chirpcars.hamiltonians import (
    StirapParams,
    SuperEffectiveParams,
    h_stirap3,
    h_super_effective,
)
from chirpcars.pulses import ConstantChirp, RoofChirp, chirped_duration


def _doc(scenario, params, **extra):
    document = {"schema_version": 1, "scenario": scenario, "params": params}
    document.update(extra)
    return document


def _ccars2(**overrides):
    params = {"omega3_peak": 5.0, "tau0": 10.0, "chirp_ratio": -7.5}
    params.update(overrides)
    return params


def _ccars4(**overrides):
    params = {
        "omega_p_peak": 1.0,
        "tau0": 10.0,
        "chirp_ratio": -7.5,
        "delta_s": 10.0,
        "delta_as": 10.0,
    }
    params.update(overrides)
    return params


def _scan(**overrides):
    params = {
        "axis1": {"name": "omega3_peak", "min": 1.0, "max": 5.0, "count": 3},
        "axis2": {"name": "chirp_ratio", "min": -3.0, "max": -2.0, "count": 4},
    }
    params.update(overrides)
    return params


def _wigner(**overrides):
    params = {
        "pulse": {"carrier": 13.0, "tau0": 10.0, "spectral_chirp": -750.0},
        "times": {"min": -150.0, "max": 150.0, "count": 7},
        "omegas": {"min": 10.0, "max": 16.0, "count": 5},
    }
    params.update(overrides)
    return params


def _propagate(**overrides):
    params = {
        "fields": {
            "omega_p_peak": 1.0,
            "tau0": 4.66074,
            "spectral_chirp": -0.45,
            "delta_s": 10.0,
            "delta_as": 10.0,
        },
        "layers": {"sigma": 0.2},
    }
    params.update(overrides)
    return params


class TestDocumentValidation:
    """Structural rejection with the dotted path of the offending field."""

    @pytest.mark.parametrize(
        "document, path, fragment",
        [
            pytest.param(
                {"scenario": "ccars2", "params": _ccars2()},
                None,
                "'schema_version' is a required property",
                id="missing-version",
            ),
            pytest.param(
                _doc("ccars2", _ccars2(), bogus=1),
                None,
                "'bogus' was unexpected",
                id="unknown-top-key",
            ),
            pytest.param(
                {**_doc("ccars2", _ccars2()), "schema_version": 2},
                "schema_version",
                "1 was expected",
                id="wrong-version",
            ),
            pytest.param(
                _doc("nope", _ccars2()),
                "scenario",
                "is not one of",
                id="unknown-scenario",
            ),
            pytest.param(
                _doc("ccars2", 3),
                "params",
                "is not of type 'object'",
                id="params-not-object",
            ),
            pytest.param(
                _doc("ccars2", _ccars2(bogus=1)),
                "params",
                "'bogus' was unexpected",
                id="unknown-param",
            ),
            pytest.param(
                _doc("ccars2", _ccars2(tau0=0.0)),
                "params.tau0",
                "less than or equal to the minimum",
                id="tau0-not-positive",
            ),
            pytest.param(
                _doc("ccars2", _ccars2(grid={"record_every": 0})),
                "params.grid.record_every",
                "less than the minimum",
                id="record-every-zero",
            ),
            pytest.param(
                _doc("ccars2", _ccars2(rates={"gamma": {"51": 0.1}})),
                "params.rates.gamma",
                "does not match any of the regexes",
                id="rate-key-out-of-range",
            ),
            pytest.param(
                _doc("ccars2", _ccars2(rates={"gamma": {"21": -0.1}})),
                "params.rates.gamma.21",
                "less than the minimum",
                id="negative-rate",
            ),
            pytest.param(
                _doc("ccars4", _ccars4(count=0)),
                "params.count",
                "less than the minimum",
                id="count-zero",
            ),
            pytest.param(
                _doc("ccars4", _ccars4(carriers=[4.0, 3.0, 4.0])),
                "params.carriers",
                "too short",
                id="three-carriers",
            ),
            pytest.param(
                _doc("scan", _scan(axis1={"name": "chirp_ratio", "min": 1.0,
                                          "max": 5.0, "count": 3})),
                "params.axis1.name",
                "'omega3_peak' was expected",
                id="axis-name-const",
            ),
            pytest.param(
                _doc("scan", _scan(observable="weird")),
                "params.observable",
                "is not one of",
                id="unknown-observable",
            ),
            pytest.param(
                _doc("wigner", _wigner(pulse={"carrier": 13.0, "tau0": 10.0,
                                              "law": {"kind": "triangle"}})),
                "params.pulse.law.kind",
                "is not one of",
                id="unknown-chirp-law",
            ),
        ],
    )
    def test_rejection_carries_field_path(self, document, path, fragment):
        with pytest.raises(ConfigurationError) as err:
            parse_config(document)
        assert err.value.field_path == path
        assert fragment in str(err.value)
        if path:
            assert str(err.value).startswith(f"{path}: ")

    def test_scenario_lists(self):
        assert TRAJECTORY_SCENARIOS == (
            "ccars2", "ccars4", "stirap3", "stirap4", "fstirap",
        )
        assert SCENARIOS == TRAJECTORY_SCENARIOS + (
            "propagate", "wigner", "phasefit", "scan",
        )
        assert DEFAULT_STEP == 0.05
        assert SPAN_FACTOR == 4.5


class TestSemanticRules:
    """Cross-field constraints the JSON schema alone cannot express."""

    def test_both_chirp_spellings_rejected(self):
        with pytest.raises(ConfigurationError) as err:
            parse_config(_doc("ccars2", _ccars2(spectral_chirp=-750.0)))
        assert err.value.field_path == "params.chirp_ratio"
        assert "exactly one" in str(err.value)

    def test_missing_chirp_rejected(self):
        params = {"omega3_peak": 5.0, "tau0": 10.0}
        with pytest.raises(ConfigurationError) as err:
            parse_config(_doc("ccars2", params))
        assert err.value.field_path == "params.chirp_ratio"

    def test_transform_limited_takes_no_chirp(self):
        with pytest.raises(ConfigurationError) as err:
            parse_config(_doc("ccars4", _ccars4(transform_limited=True)))
        assert err.value.field_path == "params.transform_limited"

        clean = {"omega_p_peak": 1.0, "tau0": 10.0, "delta_s": 10.0,
                 "delta_as": 10.0, "transform_limited": True}
        assert parse_config(_doc("ccars4", clean)).scenario == "ccars4"

    def test_transform_limited_fields_block(self):
        params = _propagate()
        params["fields"]["scheme"] = "transform_limited"
        with pytest.raises(ConfigurationError) as err:
            parse_config(_doc("propagate", params))
        assert err.value.field_path == "params.fields.scheme"

    def test_fields_block_requires_a_chirp(self):
        params = _propagate()
        del params["fields"]["spectral_chirp"]
        with pytest.raises(ConfigurationError) as err:
            parse_config(_doc("propagate", params))
        assert err.value.field_path == "params.fields.chirp_ratio"

    def test_roof_law_requires_both_rates(self):
        pulse = {"carrier": 13.0, "tau0": 10.0,
                 "law": {"kind": "roof", "rate_before": -0.01}}
        with pytest.raises(ConfigurationError) as err:
            parse_config(_doc("wigner", _wigner(pulse=pulse)))
        assert err.value.field_path == "params.pulse.law.rate_after"
        assert "requires rate_after" in str(err.value)

    def test_numeric_options_need_numeric_method(self):
        with pytest.raises(ConfigurationError) as err:
            parse_config(_doc("wigner", _wigner(numeric={"sample_dt": 0.05})))
        assert err.value.field_path == "params.numeric"

    @pytest.mark.parametrize("axis", ["times", "omegas"])
    def test_wigner_axes_must_ascend(self, axis):
        params = _wigner()
        params[axis] = {"min": 5.0, "max": -5.0, "count": 7}
        with pytest.raises(ConfigurationError) as err:
            parse_config(_doc("wigner", params))
        assert err.value.field_path == f"params.{axis}.max"

    def test_scan_axes_must_ascend(self):
        params = _scan(axis2={"name": "chirp_ratio", "min": -2.0,
                              "max": -3.0, "count": 3})
        with pytest.raises(ConfigurationError) as err:
            parse_config(_doc("scan", params))
        assert err.value.field_path == "params.axis2.max"


class TestSiConversion:
    """Laboratory units convert once, at parse time, or not at all."""

    def _stirap_doc(self, **extra):
        return _doc(
            "stirap3",
            {
                "omega_p_peak": 8.505,
                "omega_s_peak": 8.505,
                "tau": 1000.0,
                "t_pump": 500.0,
                "t_stokes": -500.0,
                "pump_chirp": -7.0,
                "grid": {"step": 10.0, "half_span": 5000.0},
                "rates": {"gamma": {"21": 0.08505}},
            },
            **extra,
        )

    def test_flag_and_document_key_agree(self):
        by_key = parse_config(self._stirap_doc(si_units=True))
        by_flag = parse_config(self._stirap_doc(), si=True)
        assert by_key.params == by_flag.params

    def test_known_magnitudes(self):
        p = parse_config(self._stirap_doc(si_units=True)).params
        # 8.505 THz is a tenth of the reference splitting, 1000 fs is 85.05
        # inverse splittings -- both exact in binary.
        assert p["omega_p_peak"] == 0.1
        assert p["tau"] == 85.05
        assert p["t_pump"] == 42.525
        assert p["t_stokes"] == -42.525
        assert p["pump_chirp"] == -0.0009677193033388736
        assert p["grid"]["step"] == pytest.approx(0.8505, rel=1e-15)
        assert p["grid"]["half_span"] == pytest.approx(425.25, rel=1e-15)
        assert p["rates"]["gamma"]["21"] == 0.001

    def test_dimensionless_ratio_survives(self):
        doc = _doc(
            "ccars4",
            _ccars4(tau0=54.8, delta_s=85.05, delta_as=85.05,
                    carriers=[340.2, 255.15, 340.2, 425.25]),
        )
        p = parse_config(doc, si=True).params
        assert p["chirp_ratio"] == -7.5
        assert p["tau0"] == pytest.approx(4.66074, rel=1e-15)
        assert p["delta_s"] == 1.0
        assert p["carriers"] == [4.0, 3.0, 4.0, 5.0]

    def test_spectral_chirp_in_fs2(self):
        params = _ccars2(tau0=54.8)
        del params["chirp_ratio"]
        params["spectral_chirp"] = -1037.0
        p = parse_config(_doc("ccars2", params), si=True).params
        assert p["spectral_chirp"] == -7.5011420925

    def test_geometry_stays_in_lab_units(self):
        params = _propagate(medium={"diameter": 1e-10, "mu_debye": 1.70})
        params["fields"].update(
            {"omega_p_peak": 8.505, "tau0": 54.8, "spectral_chirp": -1037.0,
             "delta_s": 850.5, "delta_as": 850.5}
        )
        p = parse_config(_doc("propagate", params, si_units=True)).params
        assert p["layers"]["sigma"] == 0.2
        assert p["medium"]["diameter"] == 1e-10
        assert p["medium"]["mu_debye"] == 1.70
        assert p["fields"]["delta_s"] == 10.0
        assert p["fields"]["spectral_chirp"] == -7.5011420925

    def test_without_flag_values_pass_through(self):
        p = parse_config(self._stirap_doc()).params
        assert p["omega_p_peak"] == 8.505
        assert p["tau"] == 1000.0


class TestEcho:
    """The echoed document is normalized and reproduces the run."""

    def test_input_document_is_not_mutated(self):
        document = self._si_document()
        snapshot = copy.deepcopy(document)
        parse_config(document)
        assert document == snapshot

    def test_echo_reparses_to_the_same_params(self):
        cfg = parse_config(self._si_document())
        again = parse_config(cfg.echo)
        assert again.params == cfg.params
        assert again.scenario == cfg.scenario

    def test_si_flag_is_dropped_from_echo(self):
        cfg = parse_config(self._si_document())
        assert "si_units" not in cfg.echo
        assert set(cfg.echo) == {"schema_version", "scenario", "params"}

    def test_out_dir_is_kept(self):
        document = _doc("ccars2", _ccars2(), out_dir="runs/a")
        cfg = parse_config(document)
        assert cfg.out_dir == "runs/a"
        assert cfg.echo["out_dir"] == "runs/a"

    @staticmethod
    def _si_document():
        return _doc(
            "ccars2",
            {"omega3_peak": 8.505, "tau0": 54.8, "spectral_chirp": -1037.0},
            si_units=True,
        )


class TestLoadConfig:
    def test_reads_json_document(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text(json.dumps(_doc("ccars2", _ccars2())))
        assert parse_config(load_config(path)).scenario == "ccars2"

    def test_malformed_json_is_a_configuration_error(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text("{not json")
        with pytest.raises(ConfigurationError, match="invalid JSON"):
            load_config(path)


class TestTrajectoryBuilders:
    def test_stirap3_plan(self):
        doc = _doc("stirap3", {"omega_p_peak": 0.3, "omega_s_peak": 0.3,
                               "tau": 60.0, "t_pump": 35.0, "t_stokes": -35.0})
        plan = build_trajectory(parse_config(doc))
        assert plan.dim == 3
        assert plan.rates is None
        assert plan.record_every == 1
        assert plan.description == {}
        # default half span is 4.5 tau + pulse separation = 340
        assert plan.grid[0] == -340.0
        assert plan.grid[-1] == 340.0
        assert len(plan.grid) == 13601
        stirap = StirapParams(0.3, 0.3, 60.0, 35.0, -35.0)
        for t in (-40.0, 0.0, 12.5):
            assert np.array_equal(plan.h_builder(t), h_stirap3(stirap, t))

    def test_stirap4_plan(self):
        doc = _doc("stirap4", {"omega_p_peak": 0.3, "omega_s_peak": 0.3,
                               "tau": 70.0, "t_pump": 42.0, "t_stokes": -42.0,
                               "splitting": -0.084})
        plan = build_trajectory(parse_config(doc))
        assert plan.dim == 4
        assert plan.description == {"splitting": -0.084}
        assert plan.grid[0] == -399.0
        assert plan.grid[-1] == 399.0
        assert len(plan.grid) == 15961
        assert plan.h_builder(0.0).shape == (4, 4)

    def test_fstirap_plan(self):
        doc = _doc("fstirap", {"omega0": 0.3, "mixing": np.pi / 4,
                               "t_p": 35.0, "tau": 50.0})
        plan = build_trajectory(parse_config(doc))
        assert plan.dim == 3
        assert plan.description == {"mixing": np.pi / 4}
        # default half span is 4.5 tau + twice the pump delay = 295
        assert plan.grid[0] == -295.0
        assert plan.grid[-1] >= 295.0
        assert plan.grid[-1] - 295.0 < DEFAULT_STEP

    def test_ccars2_plan(self):
        plan = build_trajectory(parse_config(_doc("ccars2", _ccars2())))
        tau = chirped_duration(-750.0, 10.0)
        assert plan.dim == 2
        assert plan.description == {"variant": "control",
                                    "stretched_duration": tau}
        assert plan.grid[0] == -SPAN_FACTOR * tau
        assert plan.grid[-1] >= SPAN_FACTOR * tau
        assert plan.grid[-1] - SPAN_FACTOR * tau < DEFAULT_STEP
        se = SuperEffectiveParams.ccars(5.0, 10.0, -750.0, 0.0, 0.0)
        for t in (-30.0, 0.0, 17.0):
            assert np.array_equal(plan.h_builder(t), h_super_effective(se, t))

    def test_ccars2_chirp_spellings_are_equivalent(self):
        by_ratio = build_trajectory(parse_config(_doc("ccars2", _ccars2())))
        params = {"omega3_peak": 5.0, "tau0": 10.0, "spectral_chirp": -750.0}
        by_spectral = build_trajectory(parse_config(_doc("ccars2", params)))
        assert np.array_equal(by_ratio.grid, by_spectral.grid)
        for t in (-30.0, 0.0, 17.0):
            assert np.array_equal(by_ratio.h_builder(t),
                                  by_spectral.h_builder(t))

    def test_ccars2_opposite_variant(self):
        doc = _doc("ccars2", _ccars2(variant="opposite"))
        plan = build_trajectory(parse_config(doc))
        assert plan.description["variant"] == "opposite"
        control = build_trajectory(parse_config(_doc("ccars2", _ccars2())))
        # both probes carry 2 alpha_s before the center; only the opposite
        # variant keeps it afterwards, so the diagonals differ there
        assert np.array_equal(plan.h_builder(-30.0), control.h_builder(-30.0))
        assert not np.allclose(plan.h_builder(30.0), control.h_builder(30.0))

    def test_ccars4_train_plan(self):
        doc = _doc("ccars4", {
            "omega_p_peak": 1.0, "tau0": 4.66074,
            "spectral_chirp": -0.4568366618058656,
            "delta_s": 10.0, "delta_as": 10.0, "balanced": False,
            "period": 85.05, "count": 10,
        })
        plan = build_trajectory(parse_config(doc))
        tau = chirped_duration(-0.4568366618058656, 4.66074)
        span = 9 * 85.05
        assert plan.dim == 4
        assert plan.description == {"stretched_duration": tau,
                                    "train_span": span}
        assert plan.grid[0] == -SPAN_FACTOR * tau
        assert plan.grid[-1] >= span + SPAN_FACTOR * tau
        assert plan.grid[-1] - (span + SPAN_FACTOR * tau) < DEFAULT_STEP

    def test_grid_and_rates_overrides(self):
        doc = _doc("ccars2", _ccars2(
            grid={"step": 0.1, "half_span": 100.0, "record_every": 5},
            rates={"gamma": {"21": 0.001}, "dephasing": {"21": 0.002}},
        ))
        plan = build_trajectory(parse_config(doc))
        assert plan.grid[0] == -100.0
        assert plan.grid[-1] == 100.0
        assert plan.grid[1] - plan.grid[0] == pytest.approx(0.1, rel=1e-12)
        assert plan.record_every == 5
        assert plan.rates.gamma[(2, 1)] == 0.001
        assert plan.rates.dephasing[(2, 1)] == 0.002

    def test_unsupported_rate_slot_fails_at_build(self):
        doc = _doc("ccars2", _ccars2(rates={"gamma": {"12": 0.001}}))
        cfg = parse_config(doc)  # structurally fine
        with pytest.raises(ConfigurationError) as err:
            build_trajectory(cfg)
        assert err.value.field_path == "params.rates"
        assert "unsupported gamma key" in str(err.value)

    def test_wrong_scenario_is_rejected(self):
        cfg = parse_config(_doc("scan", _scan()))
        with pytest.raises(ConfigurationError) as err:
            build_trajectory(cfg)
        assert err.value.field_path == "scenario"


class TestPropagationBuilder:
    def test_defaults(self):
        plan = build_propagation(parse_config(_doc("propagate", _propagate())))
        assert len(plan.stack) == 199
        assert plan.fields.envelopes.shape == (4, 4001)
        assert np.array_equal(plan.fields.carriers, [4.0, 3.0, 4.0, 5.0])
        assert plan.medium.extinction == 0.55
        assert plan.medium.kappa[(1, 3)] == 0.003626334406261644
        assert plan.rates is None
        assert plan.record_every == 1
        assert plan.beer is None
        assert plan.keep_fields is False

    def test_field_grid_overrides(self):
        params = _propagate(layers={"sigma": 0.4})
        params["fields"].update({"points_per_pulse": 2000, "pad": 3.0})
        plan = build_propagation(parse_config(_doc("propagate", params)))
        assert len(plan.stack) == 399
        assert plan.fields.envelopes.shape == (4, 1201)
        tau = chirped_duration(-0.45, 4.66074)
        assert plan.fields.times[0] == pytest.approx(-3.0 * tau, rel=1e-12)

    def test_beer_path_defaults_to_medium_extinction(self):
        params = _propagate(medium={"extinction": 1.1},
                            beer={"z_in_km": 0.25, "z_out_km": 0.25})
        plan = build_propagation(parse_config(_doc("propagate", params)))
        assert plan.beer.z_in_km == 0.25
        assert plan.beer.z_out_km == 0.25
        assert plan.beer.beta_e_per_km == 1.1

    def test_transform_limited_scheme(self):
        params = _propagate()
        params["fields"] = {"scheme": "transform_limited", "omega_p_peak": 1.0,
                            "tau0": 4.66074, "delta_s": 10.0, "delta_as": 10.0}
        plan = build_propagation(parse_config(_doc("propagate", params)))
        assert plan.fields.envelopes.shape[0] == 4

    def test_wrong_scenario_is_rejected(self):
        with pytest.raises(ConfigurationError):
            build_propagation(parse_config(_doc("ccars2", _ccars2())))


class TestWignerBuilder:
    def test_linear_plan_and_compute(self):
        plan = build_wigner(parse_config(_doc("wigner", _wigner())))
        assert plan.method == "closed_form"
        assert isinstance(plan.pulse.chirp_law, ConstantChirp)
        assert plan.pulse.chirp_law.alpha == -0.0013100436681222707
        assert plan.times[0] == -150.0 and plan.times[-1] == 150.0
        assert len(plan.times) == 7 and len(plan.omegas) == 5
        grid = plan.compute()
        assert grid.values.shape == (7, 5)
        assert np.all(np.isfinite(grid.values))

    def test_roof_law_and_numeric_options(self):
        pulse = {"carrier": 13.0, "tau0": 10.0,
                 "law": {"kind": "roof", "rate_before": -0.01,
                         "rate_after": 0.01}}
        doc = _doc("wigner", _wigner(pulse=pulse, method="numeric",
                                     numeric={"sample_dt": 0.04}))
        plan = build_wigner(parse_config(doc))
        assert plan.method == "numeric"
        assert plan.pulse.chirp_law == RoofChirp(-0.01, 0.01)
        assert plan.numeric_options == {"sample_dt": 0.04}
        grid = plan.compute()
        assert grid.values.shape == (7, 5)

    def test_wrong_scenario_is_rejected(self):
        with pytest.raises(ConfigurationError):
            build_wigner(parse_config(_doc("ccars2", _ccars2())))


class TestScanBuilder:
    def test_defaults(self):
        req = build_scan_request(parse_config(_doc("scan", _scan())))
        assert req.model is None
        assert req.spec.observable == "final_coherence"
        assert req.spec.axis1.name == "omega3_peak"
        assert (req.spec.axis1.low, req.spec.axis1.high) == (1.0, 5.0)
        assert req.spec.axis2.count == 4
        assert req.band_half_width == 1.0
        assert req.options == {"tau0": 10.0, "two_photon_delta": 0.0,
                               "big_delta": 1.0, "step": 0.02, "rates": None}

    def test_overrides(self):
        params = _scan(model="four_level", observable="antistokes_peak",
                       tau0=5.0, big_delta=10.0, step=0.1,
                       band_half_width=0.5, two_photon_delta=0.05)
        req = build_scan_request(parse_config(_doc("scan", params)))
        assert req.model == "four_level"
        assert req.spec.observable == "antistokes_peak"
        assert req.options["tau0"] == 5.0
        assert req.options["big_delta"] == 10.0
        assert req.options["step"] == 0.1
        assert req.band_half_width == 0.5

    def test_wrong_scenario_is_rejected(self):
        with pytest.raises(ConfigurationError):
            build_scan_request(parse_config(_doc("ccars2", _ccars2())))


class TestPhasefitBuilder:
    def test_defaults(self):
        req = build_phasefit_request(parse_config(_doc("phasefit", {})))
        assert req.ranges is None
        assert req.per_kind is None
        assert req.seed is None
        assert req.noise == 0.0

    def test_ranges_file(self, tmp_path):
        path = tmp_path / "ranges.json"
        path.write_text(json.dumps({"tau": 2.0, "n": 500}))
        doc = _doc("phasefit", {"per_kind": 7, "seed": 3, "noise": 0.01,
                                "ranges_file": str(path)})
        req = build_phasefit_request(parse_config(doc))
        assert req.ranges == {"tau": 2.0, "n": 500}
        assert req.per_kind == 7
        assert req.seed == 3
        assert req.noise == 0.01

    def test_wrong_scenario_is_rejected(self):
        with pytest.raises(ConfigurationError):
            build_phasefit_request(parse_config(_doc("scan", _scan())))
