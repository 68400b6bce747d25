"""
Experiment configuration model.

One experiment file (JSON or YAML) validates into ``ExperimentConfig``.
Unknown keys are rejected so typos surface as field-path errors before
any computation starts.
"""

from __future__ import annotations

from typing import Any, Literal

from pydantic import (BaseModel, ConfigDict, Field, PositiveFloat,
                      PositiveInt, field_validator, model_validator)

ExperimentId = Literal["sample", "a0-map", "limit-diffusion", "limit-jump",
                       "compare-diffusion", "compare-jump", "scaling-study",
                       "optimal-ell", "highdim-0234", "manifold-geom",
                       "manifold-circle", "identity-checks"]
AcceptId = Literal["metropolis_hastings", "barker"]


class _Strict(BaseModel):
	model_config = ConfigDict(extra="forbid")


class TargetSpec(_Strict):
	"""Which builtin target, at which eps."""

	name: str = Field("gauss_ridge", description="Builtin target id")
	epsilon: PositiveFloat = Field(0.01, description="Ridge thickness")
	n_y: PositiveInt | None = Field(
	    default=None, description="Fast dimension for product_ridge")


class EllFunctionSpec(_Strict):
	"""Position-dependent ell(x)."""

	kind: Literal["constant", "tanh", "optimal_profile"] = "constant"
	base: PositiveFloat = 1.0
	amplitude: float = 0.5
	x_min: float = -4.0
	x_max: float = 4.0
	n_points: PositiveInt = 33
	ell_grid: list[PositiveFloat] = Field(
	    default_factory=lambda: [0.25 * k for k in range(1, 25)])

	@model_validator(mode="after")
	def check_range(self) -> EllFunctionSpec:
		if self.x_max <= self.x_min:
			raise ValueError("x_max must be > x_min")
		if self.kind == "tanh" and abs(self.amplitude) >= self.base:
			raise ValueError("tanh ell needs |amplitude| < base")
		return self


class ProposalSpec(_Strict):
	"""Step-size rule: h(eps) and ell."""

	step_mode: Literal["epsilon_scaled", "unit",
	                   "custom_exponent"] = "epsilon_scaled"
	kappa: PositiveFloat | None = None
	ell: PositiveFloat = 1.0
	ell_function: EllFunctionSpec | None = None
	ell_min: PositiveFloat = 1e-3
	ell_max: PositiveFloat = 1e3

	@model_validator(mode="after")
	def check_rule(self) -> ProposalSpec:
		if self.step_mode == "custom_exponent" and self.kappa is None:
			raise ValueError("custom_exponent step mode needs kappa")
		if self.ell_min > self.ell_max:
			raise ValueError("ell_min must be <= ell_max")
		return self


class Counts(_Strict):
	"""Sample sizes."""

	chains: PositiveInt = 64
	steps: PositiveInt = 10_000
	mc: PositiveInt = 20_000
	burn_in: int = Field(2_000, ge=0)
	thinning: PositiveInt = 1
	batch: PositiveInt = 64


class ExperimentConfig(_Strict):
	"""A fully specified experiment run."""

	experiment: ExperimentId
	target: TargetSpec = Field(default_factory=TargetSpec)
	accept: AcceptId = "barker"
	proposal: ProposalSpec = Field(default_factory=ProposalSpec)
	epsilons: list[PositiveFloat] = Field(default_factory=list)
	ells: list[PositiveFloat] = Field(default_factory=list)
	counts: Counts = Field(default_factory=Counts)
	seed: int = Field(0, ge=0)
	output_dir: str | None = None
	parallelism: PositiveInt | None = None
	tolerances: dict[str, float] = Field(default_factory=dict)
	params: dict[str, Any] = Field(default_factory=dict)

	@field_validator("epsilons")
	@classmethod
	def unique_epsilons(cls, v: list[float]) -> list[float]:
		if len(set(v)) != len(v):
			raise ValueError("epsilons must be distinct")
		return v

	def tolerance(self, name: str, default: float) -> float:
		"""Acceptance gate ``name``, unless overridden in ``tolerances``."""
		return float(self.tolerances.get(name, default))

	def param(self, name: str, default: Any) -> Any:
		return self.params.get(name, default)


__all__ = [
    "AcceptId",
    "Counts",
    "EllFunctionSpec",
    "ExperimentConfig",
    "ExperimentId",
    "ProposalSpec",
    "TargetSpec",
]
