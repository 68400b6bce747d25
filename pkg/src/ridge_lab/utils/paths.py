"""
Path safety utilities.

Keeps artifact writes inside the configured output directory and
builds per-experiment artifact locations.
"""

from __future__ import annotations

import re
from pathlib import Path

SAFE_NAME_RE = re.compile(r"[^A-Za-z0-9_.-]+")


def ensure_within(base: Path | str, path: Path | str) -> Path:
	"""
	Check that an artifact path stays under the output directory.

	Parameters:
		base: Output directory the artifact must live in.
		path: Candidate artifact path; symlinks and ``..`` are resolved.

	Returns:
		``path`` unchanged, as a Path.

	Raises:
		ValueError: If the resolved path lies outside ``base``.
	"""
	root = Path(base).resolve()
	target = Path(path).resolve()
	if target != root and not target.is_relative_to(root):
		raise ValueError(f"artifact path {target} is outside {root}")
	return Path(path)


def safe_name(value: str) -> str:
	"""Return ``value`` reduced to filesystem-safe characters."""
	slug = SAFE_NAME_RE.sub("_", value).strip("_")
	return slug or "default"


def artifact_dir(output_dir: Path | str, experiment: str) -> Path:
	"""Return the artifact directory for ``experiment`` under ``output_dir``.

	The directory is not created here.

	Raises:
		ValueError: If the experiment name would escape ``output_dir``.
	"""
	base = Path(output_dir)
	return ensure_within(base, base / safe_name(experiment))


__all__ = ["artifact_dir", "ensure_within", "safe_name"]
