"""
Acceptance check models.

``CheckRecord`` is the outcome of one acceptance gate and
``CheckResult`` aggregates the gates of one experiment run.
"""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, Field


class CheckRecord(BaseModel):
	"""Result of a single acceptance gate."""

	name: str = Field(description="Gate name")
	passed: bool = Field(description="Whether the gate passed")
	value: float | None = Field(default=None, description="Measured value")
	expected: str | None = Field(default=None,
	                             description="Human-readable target")
	message: str | None = Field(default=None,
	                            description="Explanation of the result")
	severity: Literal["error", "warning", "info"] = Field(
	    default="error",
	    description="error gates fail the run; others are reported only",
	)


class CheckResult(BaseModel):
	"""All gates evaluated for one experiment."""

	experiment: str = Field(description="Experiment id")
	checks: list[CheckRecord] = Field(default_factory=list)

	@property
	def passed(self) -> bool:
		"""True if every error-severity gate passed."""
		return all(c.passed for c in self.checks if c.severity == "error")

	@property
	def failed(self) -> list[str]:
		return [
		    c.name for c in self.checks if c.severity == "error" and not c.passed
		]


__all__ = ["CheckRecord", "CheckResult"]
