"""
Run parameters model.

Validated CLI arguments for one ``ridge-lab run`` invocation. Fields
left at None defer to the experiment file and then to the settings.
"""

from __future__ import annotations

from pathlib import Path

from pydantic import BaseModel, Field, field_validator
from pydantic_core.core_schema import ValidationInfo

from ridge_lab.experiments.registry import EXPERIMENT_IDS

LOG_LEVELS = ("debug", "info", "warning", "error", "critical")


class RunParams(BaseModel):
	"""CLI overrides for a single experiment run."""

	experiment: str = Field(description="Experiment id")
	config_path: Path | None = Field(default=None,
	                                 description="JSON or YAML config file")
	seed: int | None = Field(default=None, description="Override seed")
	output_dir: str | None = Field(default=None,
	                               description="Override output directory")
	parallelism: int | None = Field(default=None,
	                                description="Override parallelism")
	log_level: str | None = Field(default=None, description="Log level")
	check: bool = Field(default=False,
	                    description="Evaluate acceptance checks")
	full_scale: bool = Field(default=False,
	                         description="Use the full protocol sizes")

	@field_validator("experiment")
	@classmethod
	def validate_experiment(cls, v: str) -> str:
		if v not in EXPERIMENT_IDS:
			raise ValueError(f"unknown experiment {v!r}")
		return v

	@field_validator("seed")
	@classmethod
	def validate_seed(cls, v: int | None) -> int | None:
		if v is not None and v < 0:
			raise ValueError("seed must be >= 0")
		return v

	@field_validator("parallelism")
	@classmethod
	def validate_positive(cls, v: int | None,
	                      info: ValidationInfo) -> int | None:
		if v is not None and v <= 0:
			raise ValueError(f"{info.field_name} must be > 0")
		return v

	@field_validator("log_level")
	@classmethod
	def validate_log_level(cls, v: str | None) -> str | None:
		if v is not None and v.lower() not in LOG_LEVELS:
			raise ValueError(f"log_level must be one of {LOG_LEVELS}")
		return v.lower() if v else v


__all__ = ["RunParams"]
