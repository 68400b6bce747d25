import json
import math

import numpy as np

from ridge_lab.evals.checks import collect_checks, within_interval
from ridge_lab.experiments.base import ExperimentOutput
from ridge_lab.loaders.config_file import validate_config
from ridge_lab.ui.reporting import (MANIFEST_FILE, SUMMARY_FILE, _plain,
                                    format_value, load_manifest, save_run,
                                    sha256_file, write_csv, write_jsonl)


def _output() -> ExperimentOutput:
	out = ExperimentOutput()
	t = out.table("states", ["chain", "x", "accepted"])
	t.add(0, 0.1, True)
	t.add(1, np.float64(1.0 / 3.0), np.bool_(False))
	out.summary.append({"mean": np.float64(0.5), "bad": math.nan})
	out.check(within_interval("acceptance_rate", 0.4, 0.0, 1.0))
	out.tags.append("CONJECTURE")
	return out


def test_format_value():
	assert format_value(True) == "1"
	assert format_value(np.int64(3)) == "3"
	assert format_value(0.1) == "0.10000000000000001"
	assert format_value("gauss_ridge") == "gauss_ridge"


def test_plain_unwraps_numpy():
	data = _plain({"a": np.arange(2), "b": np.float32(1.5), "c": math.inf})
	assert data == {"a": [0, 1], "b": 1.5, "c": None}


def test_write_csv(tmp_path):
	path = tmp_path / "nested" / "t.csv"
	n = write_csv(path, ["x", "y"], [(1, 0.5), (2, 0.25)])
	assert n == 2
	assert path.read_text() == "x,y\n1,0.5\n2,0.25\n"


def test_write_jsonl_sorts_keys(tmp_path):
	path = tmp_path / "s.jsonl"
	write_jsonl(path, [{"b": 1, "a": np.int64(2)}])
	assert path.read_text() == '{"a": 2, "b": 1}\n'


def test_save_run_writes_manifest(tmp_path):
	config = validate_config({"experiment": "sample", "seed": 5})
	out = _output()
	result = collect_checks("sample", out.checks)
	manifest = save_run(tmp_path, config, out, result, "1.2.3")

	assert (tmp_path / "states.csv").is_file()
	assert manifest.digest_of("states.csv") == sha256_file(tmp_path /
	                                                      "states.csv")
	assert manifest.digest_of("missing.csv") is None
	assert manifest.tags == ["CONJECTURE"]
	summary = (tmp_path / SUMMARY_FILE).read_text().splitlines()
	assert json.loads(summary[0]) == {"bad": None, "mean": 0.5}

	loaded = load_manifest(tmp_path / MANIFEST_FILE)
	assert loaded == manifest
	assert loaded.seed == 5
	assert loaded.config["experiment"] == "sample"
	assert loaded.checks[0].name == "acceptance_rate"


def test_save_run_is_byte_reproducible(tmp_path):
	config = validate_config({"experiment": "sample"})
	for name in ("a", "b"):
		out = _output()
		save_run(tmp_path / name, config, out,
		         collect_checks("sample", out.checks), "1.2.3")
	for fname in ("states.csv", SUMMARY_FILE, MANIFEST_FILE):
		assert ((tmp_path / "a" / fname).read_bytes() == (tmp_path / "b" /
		                                                   fname).read_bytes())
