"""
Deterministic quadrature for one-dimensional fast coordinates.

These routines integrate against the conditional law exp(B(x, .)) and a
standard Gaussian increment. Smooth integrands use Gauss-Hermite nodes
for the Gaussian variable; integrands with a kink (the MH rule) switch
to a Simpson grid, which is robust to it.
"""

from __future__ import annotations

from collections.abc import Callable
from functools import lru_cache

import numpy as np
from numpy.polynomial.hermite_e import hermegauss
from scipy.integrate import simpson

from ridge_lab.core.accept import AcceptFunction
from ridge_lab.core.targets import MultiscaleTarget
from ridge_lab.errors import UnsupportedTargetError

U_HALF_WIDTH = 10.0
Z_HALF_WIDTH = 10.0


@lru_cache(maxsize=32)
def gauss_hermite(n: int) -> tuple[np.ndarray, np.ndarray]:
	"""Nodes and weights for expectations under N(0, 1).

	Weights sum to one.
	"""
	nodes, weights = hermegauss(n)
	return nodes, weights / weights.sum()


def gauss_hermite_tensor(n: int, dim: int) -> tuple[np.ndarray, np.ndarray]:
	"""Tensor-product rule for N(0, I_dim): nodes ``(n**dim, dim)``."""
	nodes, weights = gauss_hermite(n)
	grids = np.meshgrid(*([nodes] * dim), indexing="ij")
	wgrids = np.meshgrid(*([weights] * dim), indexing="ij")
	pts = np.stack([g.ravel() for g in grids], axis=-1)
	w = np.prod(np.stack([g.ravel() for g in wgrids], axis=-1), axis=-1)
	return pts, w


def _simpson_nodes(n: int) -> int:
	return n if n % 2 == 1 else n + 1


def _gaussian_rule(smooth: bool, n_gh: int,
                   n_z: int) -> tuple[np.ndarray, np.ndarray]:
	if smooth:
		return gauss_hermite(n_gh)
	n_z = _simpson_nodes(n_z)
	z = np.linspace(-Z_HALF_WIDTH, Z_HALF_WIDTH, n_z)
	# Simpson weights times the Gaussian density
	w = np.full(n_z, 2.0)
	w[1::2] = 4.0
	w[0] = w[-1] = 1.0
	w *= (z[1] - z[0]) / 3.0
	w *= np.exp(-0.5 * z**2) / np.sqrt(2.0 * np.pi)
	return z, w


def conditional_grid(target: MultiscaleTarget, x: np.ndarray,
                     n_u: int = 1201) -> np.ndarray:
	"""Simpson grid for u covering +/- 10 conditional scales at x."""
	if target.n_y != 1:
		raise UnsupportedTargetError(
		    "quadrature over u needs a one-dimensional fast coordinate")
	if target.conditional_scale is None:
		raise UnsupportedTargetError("target has no conditional scale")
	s = float(np.max(target.conditional_scale(np.asarray(x, dtype=float))))
	return np.linspace(-U_HALF_WIDTH * s, U_HALF_WIDTH * s,
	                   _simpson_nodes(n_u))


def conditional_expectation(
        target: MultiscaleTarget,
        x: np.ndarray,
        ell: float,
        integrand: Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray],
        *,
        smooth: bool = True,
        n_u: int = 1201,
        n_gh: int = 80,
        n_z: int = 2001) -> float:
	"""Compute E[integrand(u, z, DB)] with u ~ exp(B(x, .)), z ~ N(0, 1).

	``DB = B(x, u + ell z) - B(x, u)``. The integrand receives arrays of
	shape ``(n_u, n_z)``.
	"""
	x = np.atleast_1d(np.asarray(x, dtype=float))
	u = conditional_grid(target, x, n_u)
	z, wz = _gaussian_rule(smooth, n_gh, n_z)
	U = u[:, None]
	Z = z[None, :]
	b0 = target.B(x, U[..., None])
	db = target.B(x, (U + ell * Z)[..., None]) - b0
	inner = integrand(U, Z, db) @ wz
	return float(simpson(inner * np.exp(target.B(x, u[:, None])), x=u))


def a0_quadrature(target: MultiscaleTarget,
                  F: AcceptFunction,
                  x,
                  ell: float,
                  *,
                  n_u: int = 1201,
                  n_gh: int = 80,
                  n_z: int = 2001) -> float:
	"""Limiting mean acceptance a0(x, ell) by deterministic quadrature."""
	return conditional_expectation(target,
	                               x,
	                               ell,
	                               lambda U, Z, db: F.evaluate_fn(db),
	                               smooth=F.smooth,
	                               n_u=n_u,
	                               n_gh=n_gh,
	                               n_z=n_z)


def mh_gaussian_a0(ell: float, scale: float = 1.0) -> float:
	"""Closed form a0 for the MH rule and a Gaussian u of std ``scale``.

	Equals ``(2 / pi) * arctan(2 * scale / ell)``.
	"""
	return float(2.0 / np.pi * np.arctan(2.0 * scale / ell))


__all__ = [
    "a0_quadrature",
    "conditional_expectation",
    "conditional_grid",
    "gauss_hermite",
    "gauss_hermite_tensor",
    "mh_gaussian_a0",
]
