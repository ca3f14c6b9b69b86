"""Tests for the experiment catalog, config validation, and result bundles."""

import json
import os

import numpy as np
import pytest

from hml.experiments import (
    CONFIG_SCHEMA,
    ConfigError,
    default_config,
    describe,
    list_experiments,
    run,
    validate_config,
)

EXPECTED_NAMES = [
    "morrey-scaling",
    "atom-uniform-bound",
    "decay-homogeneous",
    "decay-local",
    "hkp-closedform",
    "moment-necessity",
    "blockdecomp-roundtrip",
    "psido-bounded",
    "psido-blowup",
    "kernel-decay",
    "hardy-inequality",
    "global-local-gap",
    "regularization",
]


class TestCatalog:
    def test_thirteen_experiments_in_order(self):
        assert list_experiments() == EXPECTED_NAMES

    @pytest.mark.parametrize("name", EXPECTED_NAMES)
    def test_defaults_validate(self, name):
        cfg = validate_config(default_config(name))
        assert cfg.experiment == name
        assert cfg.output_dir

    @pytest.mark.parametrize("name", EXPECTED_NAMES)
    def test_describe_shows_config_and_tolerances(self, name):
        text = describe(name)
        assert text.startswith(name)
        assert "default config:" in text
        assert "default tolerances:" in text

    def test_describe_blowup_anchor(self):
        assert "⟨D⟩^m for m>0 is not bounded" in describe("psido-blowup")

    def test_describe_unknown_rejected(self):
        with pytest.raises(ValueError, match="unknown experiment"):
            describe("nosuch")

    def test_default_config_unknown_rejected(self):
        with pytest.raises(ValueError, match="unknown experiment"):
            default_config("nosuch")

    def test_default_config_is_a_copy(self):
        one = default_config("morrey-scaling")
        one["grid"]["N"] = 8
        assert default_config("morrey-scaling")["grid"]["N"] != 8


class TestValidation:
    def test_every_violation_listed(self):
        bad = {
            "experiment": "nosuch",
            "grid": {"n": 3, "N": 500, "L": -1.0},
            "morrey": {"q": 2.0, "lam": 1.0},
            "family": {"j_min": 4, "j_max": 0},
            "output_dir": "",
            "bogus": 1,
        }
        with pytest.raises(ConfigError) as exc_info:
            validate_config(bad)
        text = "; ".join(exc_info.value.errors)
        for needle in (
            "bogus",
            "seed",
            "grid.n",
            "grid.L",
            "output_dir",
            "unknown experiment",
            "morrey.q",
            "family.j_min",
        ):
            assert needle in text, f"missing {needle!r} in {text}"

    def test_power_of_two_violation_names_field(self):
        cfg = default_config("morrey-scaling")
        cfg["grid"]["N"] = 1000
        with pytest.raises(ConfigError) as exc_info:
            validate_config(cfg)
        assert exc_info.value.errors == ["grid.N: 1000 is not a power of two"]

    def test_reversed_ladder_rejected(self):
        cfg = default_config("morrey-scaling")
        cfg["ladder"] = {"j_lo": 5, "j_hi": 0}
        with pytest.raises(ConfigError, match="ladder.j_lo"):
            validate_config(cfg)

    def test_non_object_rejected(self):
        with pytest.raises(ConfigError, match="JSON object"):
            validate_config([1, 2, 3])

    def test_missing_seed_rejected(self):
        cfg = default_config("morrey-scaling")
        del cfg["seed"]
        with pytest.raises(ConfigError, match="seed"):
            validate_config(cfg)

    def test_schema_requires_core_fields(self):
        assert set(CONFIG_SCHEMA["required"]) == {
            "experiment",
            "seed",
            "grid",
            "output_dir",
        }

    def test_valid_config_echoed(self):
        raw = default_config("psido-blowup")
        cfg = validate_config(raw)
        assert cfg.as_dict() == raw


@pytest.fixture(scope="module")
def scaling_bundle(tmp_path_factory):
    out = tmp_path_factory.mktemp("scaling")
    cfg = default_config("morrey-scaling")
    return run(cfg, output_dir=str(out)), out


class TestRunBundle:
    def test_outputs_written(self, scaling_bundle):
        bundle, out = scaling_bundle
        names = sorted(os.path.basename(p) for p in bundle.outputs)
        assert names == ["cases.csv", "results.json", "scaling.svg"]
        for p in bundle.outputs:
            assert os.path.getsize(p) > 0

    def test_bundle_passed(self, scaling_bundle):
        bundle, _ = scaling_bundle
        assert bundle.passed

    def test_every_check_cites_tolerance(self, scaling_bundle):
        bundle, _ = scaling_bundle
        assert bundle.summary["checks"]
        for check in bundle.summary["checks"]:
            assert set(check) == {"check", "value", "op", "tolerance", "passed"}
            assert check["op"] in ("<=", ">=", "abs<=")

    def test_results_json_echoes_config(self, scaling_bundle):
        bundle, out = scaling_bundle
        with open(out / "results.json") as fh:
            blob = json.load(fh)
        assert blob["config"]["experiment"] == "morrey-scaling"
        assert blob["config"]["seed"] == default_config("morrey-scaling")["seed"]
        assert blob["summary"]["passed"] is True
        assert blob["wall_time"] >= 0.0

    def test_cases_sorted_by_key(self, scaling_bundle):
        bundle, _ = scaling_bundle
        keys = [c["case"] for c in bundle.cases]
        assert keys == sorted(keys)

    def test_csv_identical_across_runs(self, scaling_bundle, tmp_path):
        bundle, out = scaling_bundle
        again = run(default_config("morrey-scaling"), output_dir=str(tmp_path))
        assert (tmp_path / "cases.csv").read_bytes() == (out / "cases.csv").read_bytes()

    def test_csv_identical_under_threading(self, scaling_bundle, tmp_path, monkeypatch):
        bundle, out = scaling_bundle
        monkeypatch.setenv("HML_THREADS", "4")
        again = run(default_config("morrey-scaling"), output_dir=str(tmp_path))
        assert (tmp_path / "cases.csv").read_bytes() == (out / "cases.csv").read_bytes()

    def test_rerun_from_echoed_config_reproduces(self, scaling_bundle, tmp_path):
        bundle, out = scaling_bundle
        again = run(bundle.config, output_dir=str(tmp_path))
        assert (tmp_path / "cases.csv").read_bytes() == (out / "cases.csv").read_bytes()
        assert again.summary["checks"] == bundle.summary["checks"]

    def test_output_dir_override_wins(self, scaling_bundle):
        bundle, out = scaling_bundle
        assert bundle.config["output_dir"] == str(out)


class TestPartialFailure:
    def test_failing_cases_recorded_not_raised(self, tmp_path):
        cfg = default_config("hkp-closedform")
        # k = 2, 3 atoms dilated by 8 outgrow the box; k = 1 still fits
        cfg["params"]["eps"] = [1.0, 8.0]
        bundle = run(cfg, output_dir=str(tmp_path))
        failed = [c for c in bundle.cases if c["failed"]]
        succeeded = [c for c in bundle.cases if not c["failed"]]
        assert len(failed) == 2
        assert len(succeeded) == 4
        for rec in failed:
            assert "error" in rec and rec["error"]
        assert not bundle.passed
        fail_check = next(
            c for c in bundle.summary["checks"] if c["check"] == "case_failures"
        )
        assert fail_check["value"] == 2.0
        assert not fail_check["passed"]
        assert (tmp_path / "cases.csv").exists()
        assert (tmp_path / "results.json").exists()


CHEAP_PASSING = [
    "moment-necessity",
    "blockdecomp-roundtrip",
    "global-local-gap",
    "hardy-inequality",
    "decay-local",
    "decay-homogeneous",
]


@pytest.mark.parametrize("name", CHEAP_PASSING)
def test_default_run_passes(name, tmp_path):
    bundle = run(default_config(name), output_dir=str(tmp_path))
    assert bundle.passed, bundle.summary
    assert any(p.endswith(".svg") for p in bundle.outputs)
