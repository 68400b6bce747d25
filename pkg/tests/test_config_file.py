import json

import pytest

from ridge_lab.errors import ConfigError
from ridge_lab.loaders.config_file import (load_config, read_config_data,
                                           validate_config)


def test_reads_json(tmp_path):
	path = tmp_path / "run.json"
	path.write_text(json.dumps({"experiment": "sample", "seed": 7}))
	cfg = load_config(path)
	assert cfg.experiment == "sample"
	assert cfg.seed == 7
	assert cfg.target.name == "gauss_ridge"


def test_reads_yaml(tmp_path):
	path = tmp_path / "run.yaml"
	path.write_text("experiment: a0-map\n"
	                "accept: metropolis_hastings\n"
	                "target:\n"
	                "  name: curved_ridge\n"
	                "  epsilon: 0.05\n"
	                "ells: [0.5, 1.0]\n")
	cfg = load_config(path)
	assert cfg.accept == "metropolis_hastings"
	assert cfg.target.epsilon == 0.05
	assert cfg.ells == [0.5, 1.0]


def test_missing_file(tmp_path):
	with pytest.raises(ConfigError, match="not found"):
		read_config_data(tmp_path / "absent.yaml")


def test_unparsable_json(tmp_path):
	path = tmp_path / "bad.json"
	path.write_text("{not json")
	with pytest.raises(ConfigError, match="cannot parse"):
		read_config_data(path)


def test_top_level_must_be_mapping(tmp_path):
	path = tmp_path / "list.yml"
	path.write_text("- 1\n- 2\n")
	with pytest.raises(ConfigError, match="mapping"):
		read_config_data(path)


def test_field_path_on_bad_value():
	with pytest.raises(ConfigError) as info:
		validate_config({"experiment": "sample", "counts": {"chains": 0}})
	assert info.value.field_path == "counts.chains"
	assert str(info.value).startswith("counts.chains: ")


def test_unknown_key_rejected():
	with pytest.raises(ConfigError) as info:
		validate_config({"experiment": "sample", "counts": {"chanis": 4}})
	assert info.value.field_path == "counts.chanis"


def test_unknown_experiment_rejected():
	with pytest.raises(ConfigError) as info:
		validate_config({"experiment": "nope"})
	assert info.value.field_path == "experiment"


@pytest.mark.parametrize("proposal", [
    {"step_mode": "custom_exponent"},
    {"ell_min": 2.0, "ell_max": 1.0},
    {"ell_function": {"kind": "tanh", "base": 1.0, "amplitude": 1.5}},
])
def test_proposal_constraints(proposal):
	with pytest.raises(ConfigError):
		validate_config({"experiment": "sample", "proposal": proposal})


def test_duplicate_epsilons_rejected():
	with pytest.raises(ConfigError) as info:
		validate_config({"experiment": "compare-jump", "epsilons": [0.1, 0.1]})
	assert info.value.field_path == "epsilons"


def test_tolerance_and_param_lookup():
	cfg = validate_config({
	    "experiment": "manifold-geom",
	    "tolerances": {"round_trip": 1e-6},
	    "params": {"n_points": 5},
	})
	assert cfg.tolerance("round_trip", 1e-8) == 1e-6
	assert cfg.tolerance("metric_identity", 1e-12) == 1e-12
	assert cfg.param("n_points", 100) == 5
	assert cfg.param("tube", 0.05) == 0.05
