"""
Shared plumbing for experiment drivers.

A driver receives an ``ExperimentContext`` (validated config plus the
resolved parallelism) and returns an ``ExperimentOutput`` holding its
tables, summary records and check records. Drivers never touch the
filesystem; the runner writes artifacts.
"""

from __future__ import annotations

from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from ridge_lab.core.accept import AcceptFunction, get_accept
from ridge_lab.core.diffusion import (A0Estimator, DiffusionModel,
                                      optimal_ell_profile)
from ridge_lab.core.quadrature import gauss_hermite
from ridge_lab.core.rwm import ProposalRule, StepMode, tanh_ell
from ridge_lab.core.targets import MultiscaleTarget, build_target
from ridge_lab.evals.checks import DEFAULT_TOLERANCES
from ridge_lab.models.check_result import CheckRecord
from ridge_lab.models.experiment import ExperimentConfig
from ridge_lab.utils.logging import get_logger
from ridge_lab.utils.rng import stream

logger = get_logger(__name__)


@dataclass
class Table:
	"""A named CSV table."""

	name: str
	header: tuple[str, ...]
	rows: list[tuple] = field(default_factory=list)

	def add(self, *values: Any) -> None:
		if len(values) != len(self.header):
			raise ValueError(f"{self.name}: expected {len(self.header)} values, "
			                 f"got {len(values)}")
		self.rows.append(tuple(values))


@dataclass
class ExperimentOutput:
	tables: list[Table] = field(default_factory=list)
	summary: list[dict[str, Any]] = field(default_factory=list)
	checks: list[CheckRecord] = field(default_factory=list)
	warnings: list[str] = field(default_factory=list)
	tags: list[str] = field(default_factory=list)

	def table(self, name: str, header: Sequence[str]) -> Table:
		t = Table(name, tuple(header))
		self.tables.append(t)
		return t

	def check(self, record: CheckRecord) -> None:
		self.checks.append(record)

	def warn(self, messages: Sequence[str]) -> None:
		self.warnings.extend(messages)


@dataclass(frozen=True)
class ExperimentContext:
	"""Resolved inputs of one run."""

	config: ExperimentConfig
	parallelism: int = 1
	block: int = 64

	@property
	def seed(self) -> int:
		return self.config.seed

	@property
	def counts(self):
		return self.config.counts

	def rng(self, *key: str | int) -> np.random.Generator:
		return stream(self.config.seed, *key)

	def tol(self, name: str) -> float:
		return self.config.tolerance(name, DEFAULT_TOLERANCES[name])

	def param(self, name: str, default: Any) -> Any:
		return self.config.param(name, default)

	@property
	def accept(self) -> AcceptFunction:
		return get_accept(self.config.accept)

	def target(self,
	           name: str | None = None,
	           epsilon: float | None = None,
	           n_y: int | None = None) -> MultiscaleTarget:
		spec = self.config.target
		params = {}
		n = n_y if n_y is not None else spec.n_y
		if n is not None:
			params["n_y"] = n
		return build_target(name or spec.name,
		                    epsilon=spec.epsilon if epsilon is None else epsilon,
		                    **params)

	def a0_estimator(self,
	                 target: MultiscaleTarget,
	                 F: AcceptFunction | None = None,
	                 method: str = "exact_conditional") -> A0Estimator:
		return A0Estimator(target,
		                   F or self.accept,
		                   method=method,
		                   n_mc=self.counts.mc,
		                   burn_in=self.counts.burn_in,
		                   seed=self.seed)

	def rule(self, target: MultiscaleTarget) -> ProposalRule:
		"""Build the proposal rule described by the config."""
		spec = self.config.proposal
		common = dict(step_mode=StepMode(spec.step_mode),
		              kappa=spec.kappa,
		              ell_min=spec.ell_min,
		              ell_max=spec.ell_max)
		fn = spec.ell_function
		if fn is None or fn.kind == "constant":
			ell = spec.ell if fn is None else fn.base
			return ProposalRule(ell=ell, **common)
		if fn.kind == "tanh":
			ell_fn, grad = tanh_ell(fn.base, fn.amplitude)
			return ProposalRule(ell=ell_fn, grad_ell=grad, **common)
		model = DiffusionModel(target, ProposalRule(),
		                       self.a0_estimator(target))
		grid = np.linspace(fn.x_min, fn.x_max, fn.n_points)
		profile = optimal_ell_profile(model, grid, fn.ell_grid)
		logger.info("optimal ell profile: %s",
		            ", ".join(f"{v:.3g}" for v in profile.ell_star))
		return profile.as_rule(StepMode(spec.step_mode), spec.ell_min,
		                       spec.ell_max)


def stationary_average(target: MultiscaleTarget,
                       fn: Callable[[float], float],
                       n_nodes: int = 24) -> float:
	"""``E[fn(X)]`` for X ~ exp(A) by Gauss-Hermite (standard normal A)."""
	if target.n_x != 1:
		raise ValueError("stationary_average needs n_x == 1")
	z, w = gauss_hermite(n_nodes)
	return float(sum(wi * fn(float(zi)) for zi, wi in zip(z, w)))


__all__ = [
    "ExperimentContext",
    "ExperimentOutput",
    "Table",
    "stationary_average",
]
