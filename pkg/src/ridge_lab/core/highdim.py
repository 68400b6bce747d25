"""
Product-form fast coordinates and the local 0.234 rule.

When ``B(x, u) = sum_j b(x, u_j)`` over ``n_y`` coordinates and the
u-step is ``ell / sqrt(n_y)``, the acceptance at x0 tends to

    abar0(ell) = E[F(N(-ell^2 I^2 / 2, ell^2 I^2))]

where ``I^2 = E[(d b / d u)^2]`` under exp(b(x0, .)). For the MH rule
this is ``2 Phi(-ell I / 2)``. ``ell^2 abar0(ell)`` peaks where
``abar0 ~ 0.234``.
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
from scipy.integrate import simpson
from scipy.optimize import minimize_scalar
from scipy.stats import norm

from ridge_lab.core.accept import METROPOLIS_HASTINGS, AcceptFunction
from ridge_lab.core.diagnostics import Estimate, mean_se
from ridge_lab.core.quadrature import gauss_hermite
from ridge_lab.core.targets import MultiscaleTarget
from ridge_lab.errors import UnsupportedTargetError
from ridge_lab.utils.logging import get_logger

logger = get_logger(__name__)

FISHER_HALF_WIDTH = 12.0
FISHER_NODES = 2049
TAIL_TOLERANCE = 1e-6


@dataclass(frozen=True)
class ProductMarginal:
	"""One factor b(x0, u) of a product-form fast coordinate.

	``b`` and ``db_du`` take ``x0`` of shape ``(n_x,)`` and a plain array
	of u values. ``sampler(x0, shape, rng)`` draws from exp(b(x0, .)).
	``scale`` and ``center`` locate the bulk of that law.
	"""

	name: str
	b: Callable[[np.ndarray, np.ndarray], np.ndarray]
	db_du: Callable[[np.ndarray, np.ndarray], np.ndarray]
	sampler: Callable[[np.ndarray, tuple, np.random.Generator], np.ndarray]
	scale: Callable[[np.ndarray], float]
	center: Callable[[np.ndarray], float] = lambda x0: 0.0

	@classmethod
	def curved(cls) -> ProductMarginal:
		"""The curved-ridge factor: u ~ N(0, 1 / (1 + x^2))."""

		def precision(x0: np.ndarray) -> float:
			return 1.0 + float(np.ravel(x0)[0])**2

		def b(x0, u):
			p = precision(x0)
			return -0.5 * p * u**2 + 0.5 * np.log(p / (2.0 * np.pi))

		def db_du(x0, u):
			return -precision(x0) * u

		def sampler(x0, shape, rng):
			return rng.standard_normal(shape) / np.sqrt(precision(x0))

		return cls("curved", b, db_du, sampler,
		           lambda x0: 1.0 / np.sqrt(precision(x0)))

	@classmethod
	def from_target(cls, target: MultiscaleTarget) -> ProductMarginal:
		"""Factor of a builtin product target (curved or product ridge)."""
		if target.name in ("curved_ridge", "product_ridge"):
			return cls.curved()
		raise UnsupportedTargetError(
		    f"target {target.name!r} has no product-form factor")


def fisher_term(pm: ProductMarginal,
                x0,
                n_quad: int = FISHER_NODES) -> Estimate:
	"""I^2 = E[(db/du)^2] under exp(b(x0, .)) by Simpson's rule.

	The domain is ``center +/- 12 scale``. The integral is recomputed on
	the doubled domain at the same spacing; a relative change above 1e-6
	attaches a precision warning.
	"""
	x0 = np.atleast_1d(np.asarray(x0, dtype=float))
	mu = float(pm.center(x0))
	s = float(pm.scale(x0))

	def integrate(half: float, nodes: int) -> float:
		u = np.linspace(mu - half * s, mu + half * s, nodes)
		return float(simpson(pm.db_du(x0, u)**2 * np.exp(pm.b(x0, u)), x=u))

	value = integrate(FISHER_HALF_WIDTH, n_quad)
	wide = integrate(2 * FISHER_HALF_WIDTH, 2 * n_quad - 1)
	change = abs(wide - value) / max(abs(value), 1e-300)
	if change > TAIL_TOLERANCE:
		msg = f"fisher term tail truncation changes I^2 by {change:.2e}"
		logger.warning(msg)
		return Estimate(value, 0.0, (msg,))
	return Estimate(value, 0.0)


def limiting_acceptance(I2: float,
                        ell: float,
                        F: AcceptFunction = METROPOLIS_HASTINGS,
                        n_gh: int = 80) -> float:
	"""abar0(ell) = E[F(N(-ell^2 I^2 / 2, ell^2 I^2))].

	Closed form ``2 Phi(-ell I / 2)`` for the MH rule, Gauss-Hermite
	otherwise.
	"""
	if not I2 > 0:
		raise ValueError("I2 must be > 0")
	c = ell * np.sqrt(I2)
	if F is METROPOLIS_HASTINGS:
		return float(2.0 * norm.cdf(-0.5 * c))
	z, w = gauss_hermite(n_gh)
	return float(w @ F.evaluate_fn(-0.5 * c**2 + c * z))


@dataclass(frozen=True)
class HighdimOptimum:
	ell: float
	scaled: float
	acceptance: float


def optimal_ell_highdim(I2: float,
                        F: AcceptFunction = METROPOLIS_HASTINGS
                       ) -> HighdimOptimum:
	"""Maximize ``ell^2 abar0(ell)`` by golden section.

	``scaled`` is ``ell * I``, which does not depend on I2.
	"""
	if not I2 > 0:
		raise ValueError("I2 must be > 0")
	inv = 1.0 / np.sqrt(I2)
	res = minimize_scalar(
	    lambda ell: -ell**2 * limiting_acceptance(I2, ell, F),
	    bracket=(0.5 * inv, 2.4 * inv, 8.0 * inv),
	    method="golden",
	    tol=1e-10)
	ell = float(res.x)
	return HighdimOptimum(ell, ell * float(np.sqrt(I2)),
	                      limiting_acceptance(I2, ell, F))


def local_optimal_step(pm: ProductMarginal,
                       x0,
                       n_y: int,
                       F: AcceptFunction = METROPOLIS_HASTINGS) -> float:
	"""The per-coordinate step ``ell_star(x0) / sqrt(n_y)``."""
	return optimal_ell_highdim(fisher_term(pm, x0).value, F).ell / np.sqrt(n_y)


def empirical_local_acceptance(pm: ProductMarginal,
                               n_y: int,
                               x0,
                               ell: float,
                               n_mc: int,
                               rng: np.random.Generator,
                               batch: int = 2000,
                               F: AcceptFunction = METROPOLIS_HASTINGS
                              ) -> Estimate:
	"""Mean of ``F(sum_j b(x0, Y_j + ell Z_j) - b(x0, Y_j))``.

	``ell`` is the already scaled per-coordinate step. Draws come in
	batches of ``batch`` rows: Y first, then Z.
	"""
	if n_y < 1 or n_mc < 2:
		raise ValueError("n_y must be >= 1 and n_mc >= 2")
	x0 = np.atleast_1d(np.asarray(x0, dtype=float))
	vals = np.empty(n_mc)
	done = 0
	while done < n_mc:
		k = min(batch, n_mc - done)
		y = pm.sampler(x0, (k, n_y), rng)
		z = rng.standard_normal((k, n_y))
		delta = np.sum(pm.b(x0, y + ell * z) - pm.b(x0, y), axis=1)
		vals[done:done + k] = F.evaluate_fn(delta)
		done += k
	return mean_se(vals)


__all__ = [
    "HighdimOptimum",
    "ProductMarginal",
    "empirical_local_acceptance",
    "fisher_term",
    "limiting_acceptance",
    "local_optimal_step",
    "optimal_ell_highdim",
]
