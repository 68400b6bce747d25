from pathlib import Path

import pytest

from ridge_lab.models.run_params import RunParams


def test_run_params_valid():
	rp = RunParams(experiment="a0-map", config_path="cfg.yaml", seed=4)
	assert rp.config_path == Path("cfg.yaml")
	assert rp.seed == 4
	assert rp.check is False
	assert rp.full_scale is False


def test_run_params_unknown_experiment():
	with pytest.raises(ValueError):
		RunParams(experiment="teleport")


def test_run_params_negative_seed():
	with pytest.raises(ValueError):
		RunParams(experiment="sample", seed=-1)


def test_run_params_positive_parallelism():
	with pytest.raises(ValueError):
		RunParams(experiment="sample", parallelism=0)


def test_run_params_log_level():
	assert RunParams(experiment="sample", log_level="DEBUG").log_level == "debug"
	with pytest.raises(ValueError):
		RunParams(experiment="sample", log_level="loud")
