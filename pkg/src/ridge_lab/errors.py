"""
Exception types.

Argument problems subclass ``ValueError`` and numerical breakdowns
subclass ``RuntimeError`` so callers that only know the builtins keep
working. The CLI maps each family onto an exit code.
"""

from __future__ import annotations


class LabError(Exception):
	"""Base class for every error raised by ridge-lab."""


class DimensionError(LabError, ValueError):
	"""An array argument does not match the target dimensions."""


class UnsupportedTargetError(LabError, ValueError):
	"""The target lacks a sampler or structure the operation needs."""


class NonDifferentiableError(LabError, ValueError):
	"""A derivative was requested where the accept function has none."""


class DegenerateChartError(LabError, ValueError):
	"""The chart Jacobian is rank deficient at the requested point."""


class ConfigError(LabError, ValueError):
	"""Invalid experiment configuration.

	Parameters:
		message: Human readable description.
		field_path: Dotted path of the offending field, when known.
	"""

	def __init__(self, message: str, field_path: str | None = None) -> None:
		self.field_path = field_path
		prefix = f"{field_path}: " if field_path else ""
		super().__init__(prefix + message)


class NumericalFailure(LabError, RuntimeError):
	"""A simulation or solver broke down at run time."""


class IntegrationBlowup(NumericalFailure):
	"""An Euler-Maruyama path left the finite reals."""

	def __init__(self, path: int, step: int) -> None:
		self.path = path
		self.step = step
		super().__init__(f"non-finite state on path {path} at step {step}")


class ProjectionFailure(NumericalFailure):
	"""Gauss-Newton projection onto the manifold did not converge."""

	def __init__(self, residual: float, step: int | None = None) -> None:
		self.residual = residual
		self.step = step
		where = f" at chain step {step}" if step is not None else ""
		super().__init__(
		    f"projection did not converge{where} (residual {residual:.3e})")


class ResamplingFailure(NumericalFailure):
	"""Every importance weight in the resampling batch was zero."""


class ToleranceFailure(LabError, RuntimeError):
	"""One or more acceptance checks failed in check mode."""

	def __init__(self, failed: list[str]) -> None:
		self.failed = list(failed)
		super().__init__("failed checks: " + ", ".join(self.failed))


__all__ = [
    "ConfigError",
    "DegenerateChartError",
    "DimensionError",
    "IntegrationBlowup",
    "LabError",
    "NonDifferentiableError",
    "NumericalFailure",
    "ProjectionFailure",
    "ResamplingFailure",
    "ToleranceFailure",
    "UnsupportedTargetError",
]
