"""Runtime settings loaded from environment variables.

Provides ``LabSettings`` backed by ``pydantic-settings``, reading
``RIDGE_LAB_*`` variables and ``.env`` files. Field aliases match the
env-var names and **must** be used when constructing ``LabSettings`` in
code or tests.
"""

from __future__ import annotations

import os
from pathlib import Path
from typing import TYPE_CHECKING, Any

from dotenv import load_dotenv
from pydantic import Field, field_validator
from pydantic_core.core_schema import ValidationInfo
from pydantic_settings import BaseSettings, SettingsConfigDict

if TYPE_CHECKING:
	from ridge_lab.models.run_params import RunParams


def load_env(env_file: str | Path | None = None) -> None:
	"""Load environment variables from an `.env` file if present."""
	env_path = Path(env_file) if env_file else Path(".env")
	if env_path.exists():
		load_dotenv(env_path)


class LabSettings(BaseSettings):
	"""Process-wide defaults for experiment runs."""

	model_config = SettingsConfigDict(env_prefix="", case_sensitive=False)

	output_dir: str = Field("results", alias="RIDGE_LAB_OUTPUT_DIR",
	                        description="Base directory for artifacts")
	parallelism: int = Field(
	    default_factory=lambda: os.cpu_count() or 1,
	    alias="RIDGE_LAB_PARALLELISM",
	    description="Concurrent chain blocks",
	)
	log_level: str = Field("info", alias="RIDGE_LAB_LOG_LEVEL",
	                       description="Root log level")
	chain_block: int = Field(
	    64,
	    alias="RIDGE_LAB_CHAIN_BLOCK",
	    description="Chains vectorised together in one block",
	)

	@field_validator("parallelism", "chain_block")
	@classmethod
	def validate_positive(cls, v: Any, info: ValidationInfo) -> Any:
		"""Reject zero and negative values."""
		if int(v) <= 0:
			raise ValueError(f"{info.field_name} must be > 0")
		return v

	@property
	def output_path(self) -> Path:
		return Path(self.output_dir)

	def apply_overrides(self, run_params: RunParams) -> None:
		"""Copy the non-None CLI overrides in ``run_params`` onto settings."""
		_OVERRIDES: list[tuple[str, str]] = [
		    ("output_dir", "output_dir"),
		    ("parallelism", "parallelism"),
		    ("log_level", "log_level"),
		]
		for param_field, settings_field in _OVERRIDES:
			value = getattr(run_params, param_field)
			if value is not None:
				setattr(self, settings_field, value)


__all__ = ["LabSettings", "load_env"]
