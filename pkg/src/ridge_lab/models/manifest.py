"""
Run manifest model.

The manifest records everything needed to reproduce a run. It carries
no timestamps, so identical config and seed give identical bytes.
"""

from __future__ import annotations

from typing import Any

from pydantic import BaseModel, Field

from ridge_lab.models.check_result import CheckRecord


class ArtifactEntry(BaseModel):
	name: str
	sha256: str
	rows: int | None = None


class RunManifest(BaseModel):
	"""Resolved config, seed and artifact digests for one run."""

	experiment: str
	version: str
	seed: int
	config: dict[str, Any]
	artifacts: list[ArtifactEntry] = Field(default_factory=list)
	checks: list[CheckRecord] = Field(default_factory=list)
	tags: list[str] = Field(default_factory=list)
	warnings: list[str] = Field(default_factory=list)

	def digest_of(self, name: str) -> str | None:
		for entry in self.artifacts:
			if entry.name == name:
				return entry.sha256
		return None


__all__ = ["ArtifactEntry", "RunManifest"]
