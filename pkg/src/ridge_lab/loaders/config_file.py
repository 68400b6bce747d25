"""
Experiment file loader.

Reads a JSON or YAML experiment file (chosen by suffix) and validates
it into ``ExperimentConfig``. Parse and validation problems are
reported as ``ConfigError`` carrying the dotted path of the first bad
field.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any

import yaml
from pydantic import ValidationError

from ridge_lab.errors import ConfigError
from ridge_lab.models.experiment import ExperimentConfig

YAML_SUFFIXES = (".yaml", ".yml")


def read_config_data(path: str | Path) -> dict[str, Any]:
	"""
	Parse an experiment file into a plain mapping.

	Parameters:
		path: File ending in ``.json``, ``.yaml`` or ``.yml``.

	Returns:
		The parsed top-level mapping.

	Raises:
		ConfigError: If the file is missing, unparsable or not a mapping.
	"""
	p = Path(path)
	if not p.is_file():
		raise ConfigError(f"config file not found: {p}")
	text = p.read_text(encoding="utf-8")
	try:
		if p.suffix.lower() in YAML_SUFFIXES:
			data = yaml.safe_load(text)
		else:
			data = json.loads(text)
	except (yaml.YAMLError, json.JSONDecodeError) as exc:
		raise ConfigError(f"cannot parse {p.name}: {exc}") from exc
	if not isinstance(data, dict):
		raise ConfigError(f"{p.name} must contain a mapping at the top level")
	return data


def field_path(error: ValidationError) -> str:
	"""Dotted location of the first validation error, e.g. ``counts.chains``."""
	errs = error.errors()
	if not errs:
		return ""
	return ".".join(str(part) for part in errs[0].get("loc", ()))


def validate_config(data: dict[str, Any]) -> ExperimentConfig:
	"""Validate a mapping, turning pydantic errors into ``ConfigError``."""
	try:
		return ExperimentConfig.model_validate(data)
	except ValidationError as exc:
		first = exc.errors()[0]
		raise ConfigError(first.get("msg", str(exc)),
		                  field_path(exc) or None) from exc


def load_config(path: str | Path) -> ExperimentConfig:
	"""Read and validate an experiment file."""
	return validate_config(read_config_data(path))


__all__ = ["field_path", "load_config", "read_config_data", "validate_config"]
