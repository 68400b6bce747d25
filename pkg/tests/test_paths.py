import pytest

from ridge_lab.utils.paths import artifact_dir, ensure_within, safe_name


def test_ensure_within(tmp_path):
	base = tmp_path / "base"
	child = base / "a" / "b"
	# path may not exist; ensure_within should still allow
	assert ensure_within(base, child) == child


def test_ensure_within_raises(tmp_path):
	base = tmp_path / "base"
	outside = tmp_path.parent / "other"
	with pytest.raises(ValueError):
		ensure_within(base, outside)


def test_safe_name():
	assert safe_name("a0-map") == "a0-map"
	assert safe_name("a b/c") == "a_b_c"
	assert safe_name("///") == "default"


def test_artifact_dir(tmp_path):
	assert artifact_dir(tmp_path, "highdim-0234") == tmp_path / "highdim-0234"
	with pytest.raises(ValueError):
		artifact_dir(tmp_path, "..")
