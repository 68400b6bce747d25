"""
Two-scale ridged target densities.

A target is the density

    pi_eps(x, y) = exp(A(x) + B(x, y / eps)) / eps**n_y

on R^{n_x} x R^{n_y}. All numerical work happens in the standardized
coordinate ``u = y / eps`` where the law is eps-free: ``(x, u)`` has
density ``exp(A(x) + B(x, u))``.

Callables follow a batch convention: ``x`` has shape ``(..., n_x)``,
``u`` has shape ``(..., n_y)`` and scalar-valued functions return the
broadcast leading shape.
"""

from __future__ import annotations

from collections.abc import Callable, Mapping
from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np
from scipy.integrate import simpson

from ridge_lab.errors import DimensionError, UnsupportedTargetError
from ridge_lab.utils.logging import get_logger

logger = get_logger(__name__)

LOG_2PI = float(np.log(2.0 * np.pi))

ArrayFn = Callable[..., np.ndarray]


@dataclass(frozen=True)
class MultiscaleTarget:
	"""The density pi_eps via A, B and their gradients.

	Instances are immutable and safe to share between concurrently
	running chains. Samplers take an externally owned generator.
	"""

	name: str
	n_x: int
	n_y: int
	epsilon: float
	A: ArrayFn
	grad_A: ArrayFn
	B: ArrayFn
	grad_x_B: ArrayFn
	grad_u_B: ArrayFn
	conditional_sampler: Callable[[np.ndarray, np.random.Generator],
	                              np.ndarray] | None = None
	marginal_sampler: Callable[[int, np.random.Generator],
	                           np.ndarray] | None = None
	conditional_scale: ArrayFn | None = None
	factor: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None
	params: Mapping[str, Any] = field(default_factory=dict)

	def __post_init__(self) -> None:
		if self.n_x <= 0 or self.n_y <= 0:
			raise ValueError("n_x and n_y must be positive")
		if not np.isfinite(self.epsilon) or self.epsilon <= 0:
			raise ValueError("epsilon must be a positive finite number")

	def with_epsilon(self, epsilon: float) -> MultiscaleTarget:
		"""Return a copy at thickness ``epsilon``."""
		return replace(self, epsilon=float(epsilon))

	@property
	def exact_joint_sampler(self) -> bool:
		"""True when stationary draws can be produced exactly."""
		return (self.marginal_sampler is not None and
		        self.conditional_sampler is not None)


def as_coords(value: Any, dim: int, what: str) -> np.ndarray:
	"""Coerce ``value`` to a float array whose last axis has length ``dim``."""
	arr = np.asarray(value, dtype=float)
	if arr.ndim == 0:
		if dim != 1:
			raise DimensionError(f"{what} must have {dim} components")
		arr = arr.reshape(1)
	if arr.shape[-1] != dim:
		raise DimensionError(
		    f"{what} has {arr.shape[-1]} components, expected {dim}")
	return arr


def _scalar(value: np.ndarray) -> float | np.ndarray:
	return float(value) if np.ndim(value) == 0 else value


def log_density(target: MultiscaleTarget, x: Any, y: Any) -> float | np.ndarray:
	"""Log of pi_eps at ``(x, y)`` in original coordinates.

	Raises:
		DimensionError: If ``x`` or ``y`` has the wrong trailing size.
	"""
	xa = as_coords(x, target.n_x, "x")
	ya = as_coords(y, target.n_y, "y")
	eps = target.epsilon
	value = (-target.n_y * np.log(eps) + target.A(xa) +
	         target.B(xa, ya / eps))
	return _scalar(value)


def log_density_standardized(target: MultiscaleTarget, x: Any,
                             u: Any) -> float | np.ndarray:
	"""Log density ``A(x) + B(x, u)`` of the standardized law."""
	xa = as_coords(x, target.n_x, "x")
	ua = as_coords(u, target.n_y, "u")
	return _scalar(target.A(xa) + target.B(xa, ua))


def sample_stationary(
        target: MultiscaleTarget, count: int,
        rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
	"""Draw ``count`` i.i.d. points from the standardized law.

	``x`` is drawn first from exp(A), then ``u`` from exp(B(x, .)).

	Returns:
		Arrays of shape ``(count, n_x)`` and ``(count, n_y)``.

	Raises:
		UnsupportedTargetError: If the target has no exact sampler.
	"""
	if count < 0:
		raise ValueError("count must be >= 0")
	if not target.exact_joint_sampler:
		raise UnsupportedTargetError(
		    f"target {target.name!r} has no exact joint sampler")
	if count == 0:
		return np.empty((0, target.n_x)), np.empty((0, target.n_y))
	x = target.marginal_sampler(count, rng)
	u = target.conditional_sampler(x, rng)
	return x, u


# ── builtins ─────────────────────────────────────────────────────────


def _gaussian_A(x: np.ndarray) -> np.ndarray:
	return -0.5 * np.sum(x**2, axis=-1) - 0.5 * x.shape[-1] * LOG_2PI


def _gaussian_grad_A(x: np.ndarray) -> np.ndarray:
	return -np.asarray(x, dtype=float)


def _standard_normal_x(n_x: int) -> Callable:

	def sampler(count: int, rng: np.random.Generator) -> np.ndarray:
		return rng.standard_normal((count, n_x))

	return sampler


def _lead_shape(x: np.ndarray, u: np.ndarray) -> tuple[int, ...]:
	return np.broadcast_shapes(np.shape(x)[:-1], np.shape(u)[:-1])


def gauss_ridge(epsilon: float = 1.0) -> MultiscaleTarget:
	"""Standard Gaussian in both coordinates; B does not depend on x."""

	def B(x: np.ndarray, u: np.ndarray) -> np.ndarray:
		val = -0.5 * np.sum(u**2, axis=-1) - 0.5 * u.shape[-1] * LOG_2PI
		return np.broadcast_to(val, _lead_shape(x, u)).copy()

	def grad_x_B(x: np.ndarray, u: np.ndarray) -> np.ndarray:
		return np.zeros(_lead_shape(x, u) + (x.shape[-1],))

	def grad_u_B(x: np.ndarray, u: np.ndarray) -> np.ndarray:
		return np.broadcast_to(-u, _lead_shape(x, u) + (u.shape[-1],)).copy()

	def conditional(x: np.ndarray, rng: np.random.Generator) -> np.ndarray:
		return rng.standard_normal(np.shape(x)[:-1] + (1,))

	def scale(x: np.ndarray) -> np.ndarray:
		return np.ones(np.shape(x)[:-1])

	def factor(x: np.ndarray, u: np.ndarray) -> np.ndarray:
		return -0.5 * u**2 - 0.5 * LOG_2PI + 0.0 * x[..., 0]

	return MultiscaleTarget(
	    name="gauss_ridge",
	    n_x=1,
	    n_y=1,
	    epsilon=float(epsilon),
	    A=_gaussian_A,
	    grad_A=_gaussian_grad_A,
	    B=B,
	    grad_x_B=grad_x_B,
	    grad_u_B=grad_u_B,
	    conditional_sampler=conditional,
	    marginal_sampler=_standard_normal_x(1),
	    conditional_scale=scale,
	    factor=factor,
	)


def _precision(x: np.ndarray) -> np.ndarray:
	return 1.0 + x[..., 0]**2


def curved_factor(x: np.ndarray, u: np.ndarray) -> np.ndarray:
	"""Per-coordinate log density b(x, u) of the curved ridge.

	``x`` has shape ``(..., 1)`` and ``u`` is a plain array broadcasting
	against ``x[..., 0]``.
	"""
	p = _precision(x)
	return -0.5 * p * u**2 + 0.5 * np.log(p) - 0.5 * LOG_2PI


def product_ridge(n_y: int, epsilon: float = 1.0) -> MultiscaleTarget:
	"""Product of ``n_y`` curved-ridge factors sharing one x coordinate.

	Given x, the coordinates of u are i.i.d. centred Gaussians with
	variance 1 / (1 + x**2).
	"""
	if n_y <= 0:
		raise ValueError("n_y must be positive")

	def B(x: np.ndarray, u: np.ndarray) -> np.ndarray:
		p = _precision(x)
		n = u.shape[-1]
		return (-0.5 * p * np.sum(u**2, axis=-1) + 0.5 * n * np.log(p) -
		        0.5 * n * LOG_2PI)

	def grad_x_B(x: np.ndarray, u: np.ndarray) -> np.ndarray:
		p = _precision(x)
		xs = x[..., 0]
		n = u.shape[-1]
		g = xs * (n / p - np.sum(u**2, axis=-1))
		return g[..., None]

	def grad_u_B(x: np.ndarray, u: np.ndarray) -> np.ndarray:
		return -_precision(x)[..., None] * u

	def conditional(x: np.ndarray, rng: np.random.Generator) -> np.ndarray:
		z = rng.standard_normal(np.shape(x)[:-1] + (n_y,))
		return z / np.sqrt(_precision(x))[..., None]

	def scale(x: np.ndarray) -> np.ndarray:
		return 1.0 / np.sqrt(_precision(x))

	name = "curved_ridge" if n_y == 1 else "product_ridge"
	return MultiscaleTarget(
	    name=name,
	    n_x=1,
	    n_y=n_y,
	    epsilon=float(epsilon),
	    A=_gaussian_A,
	    grad_A=_gaussian_grad_A,
	    B=B,
	    grad_x_B=grad_x_B,
	    grad_u_B=grad_u_B,
	    conditional_sampler=conditional,
	    marginal_sampler=_standard_normal_x(1),
	    conditional_scale=scale,
	    factor=curved_factor,
	    params={"n_y": n_y},
	)


def curved_ridge(epsilon: float = 1.0) -> MultiscaleTarget:
	"""Gaussian u | x with variance 1 / (1 + x**2)."""
	return product_ridge(1, epsilon)


# ── registry ─────────────────────────────────────────────────────────

TargetFactory = Callable[..., MultiscaleTarget]

_REGISTRY: dict[str, TargetFactory] = {
    "gauss_ridge": lambda epsilon=1.0, **_: gauss_ridge(epsilon),
    "curved_ridge": lambda epsilon=1.0, **_: curved_ridge(epsilon),
    "product_ridge":
        lambda epsilon=1.0, n_y=1, **_: product_ridge(int(n_y), epsilon),
}


def builtin_target_ids() -> list[str]:
	"""Return the registered target names."""
	return sorted(_REGISTRY)


def build_target(name: str, epsilon: float = 1.0,
                 **params: Any) -> MultiscaleTarget:
	"""Instantiate a registered target by name.

	Raises:
		UnsupportedTargetError: For an unknown name.
	"""
	try:
		factory = _REGISTRY[name]
	except KeyError:
		raise UnsupportedTargetError(
		    f"unknown target {name!r}; known: {', '.join(sorted(_REGISTRY))}"
		) from None
	return factory(epsilon=epsilon, **params)


def register_target(name: str, factory: TargetFactory) -> list[str]:
	"""Register a user target factory under ``name``.

	The factory is called as ``factory(epsilon=1.0)`` and spot-checked for
	gradient consistency and, where possible, normalization of
	exp(B(x, .)). Problems are logged, not enforced.

	Returns:
		Warnings produced by the spot checks.
	"""
	target = factory(epsilon=1.0)
	warnings: list[str] = []
	rng = np.random.default_rng(0)
	xs = rng.standard_normal((20, target.n_x))
	us = rng.standard_normal((20, target.n_y))
	grad_err = check_gradients(target, xs, us)
	if grad_err > 1e-5:
		warnings.append(f"gradient mismatch {grad_err:.2e}")
	if target.conditional_scale is not None and (target.n_y == 1 or
	                                             target.factor is not None):
		norm_err = check_normalization(target, xs[:5])
		if norm_err > 1e-6:
			warnings.append(f"exp(B) normalization off by {norm_err:.2e}")
	for msg in warnings:
		logger.warning("target %s: %s", name, msg)
	_REGISTRY[name] = factory
	return warnings


# ── property checks ──────────────────────────────────────────────────


def _fd_step(v: np.ndarray) -> np.ndarray:
	return 1e-5 * (1.0 + np.abs(v))


def check_gradients(target: MultiscaleTarget, xs: np.ndarray,
                    us: np.ndarray) -> float:
	"""Largest scaled gap between analytic and central-difference gradients.

	The gap for each component is ``|fd - g| / (1 + |g|)``, maximized over
	A, the x-gradient of B and the u-gradient of B at every point.
	"""
	xs = as_coords(xs, target.n_x, "x").reshape(-1, target.n_x)
	us = as_coords(us, target.n_y, "u").reshape(-1, target.n_y)
	worst = 0.0
	for x, u in zip(xs, us):
		checks = [
		    (lambda v: target.A(v), x, target.grad_A(x)),
		    (lambda v: target.B(v, u), x, target.grad_x_B(x, u)),
		    (lambda v: target.B(x, v), u, target.grad_u_B(x, u)),
		]
		for fn, point, grad in checks:
			grad = np.atleast_1d(np.asarray(grad, dtype=float))
			for i in range(point.shape[0]):
				d = _fd_step(point[i])
				up = point.copy()
				dn = point.copy()
				up[i] += d
				dn[i] -= d
				fd = (float(fn(up)) - float(fn(dn))) / (2.0 * d)
				worst = max(worst, abs(fd - grad[i]) / (1.0 + abs(grad[i])))
	return worst


def check_normalization(target: MultiscaleTarget,
                        x_grid: np.ndarray,
                        half_width: float = 10.0,
                        n_nodes: int = 2001) -> float:
	"""Largest deviation of the integral of exp(B(x, .)) from one.

	Integrates by Simpson's rule on ``[-half_width * s, half_width * s]``
	where ``s`` is the conditional scale at x. Product targets are checked
	through their one-dimensional factor.

	Raises:
		UnsupportedTargetError: Without a conditional scale, or for
			``n_y > 1`` without a product factor.
	"""
	if target.conditional_scale is None:
		raise UnsupportedTargetError("target has no conditional scale")
	if target.n_y > 1 and target.factor is None:
		raise UnsupportedTargetError(
		    "normalization check needs n_y == 1 or a product factor")
	worst = 0.0
	for x in as_coords(x_grid, target.n_x, "x").reshape(-1, target.n_x):
		s = float(np.max(target.conditional_scale(x)))
		grid = np.linspace(-half_width * s, half_width * s, n_nodes)
		if target.n_y == 1:
			logp = target.B(x, grid[:, None])
		else:
			logp = target.factor(x, grid)
		total = simpson(np.exp(logp), x=grid)
		worst = max(worst, abs(total - 1.0))
	return worst


__all__ = [
    "LOG_2PI",
    "as_coords",
    "MultiscaleTarget",
    "build_target",
    "builtin_target_ids",
    "check_gradients",
    "check_normalization",
    "curved_factor",
    "curved_ridge",
    "gauss_ridge",
    "log_density",
    "log_density_standardized",
    "product_ridge",
    "register_target",
    "sample_stationary",
]
