"""
Compactly supported smooth test functions with closed-form derivatives.

Used to probe generators: every function vanishes identically outside
a ball of radius ``radius`` around ``center``.
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class TestFunction:
	"""A bump phi with gradient and Laplacian on R^{n_x}.

	All three callables accept ``x`` of shape ``(..., n_x)``.
	"""

	__test__ = False  # keep pytest from collecting this class

	name: str
	center: np.ndarray
	radius: float
	phi: Callable[[np.ndarray], np.ndarray]
	grad: Callable[[np.ndarray], np.ndarray]
	laplacian: Callable[[np.ndarray], np.ndarray]

	def __call__(self, x: np.ndarray) -> np.ndarray:
		return self.phi(x)


def _offset(x: np.ndarray, center: np.ndarray) -> np.ndarray:
	return np.asarray(x, dtype=float) - center


def gauss_bump(center=0.0, radius: float = 3.0) -> TestFunction:
	"""The bump ``exp(1 - 1 / (1 - s))`` with ``s = |x - c|^2 / R^2``.

	Equals 1 at the center and is C-infinity with all derivatives vanishing
	on the sphere of radius R.
	"""
	c = np.atleast_1d(np.asarray(center, dtype=float))
	R2 = float(radius)**2

	def parts(x: np.ndarray):
		d = _offset(x, c)
		s = np.sum(d**2, axis=-1) / R2
		inside = s < 1.0
		one_minus = np.where(inside, 1.0 - s, 1.0)
		val = np.where(inside, np.exp(1.0 - 1.0 / one_minus), 0.0)
		return d, inside, one_minus, val

	def phi(x: np.ndarray) -> np.ndarray:
		return parts(x)[3]

	def grad(x: np.ndarray) -> np.ndarray:
		d, inside, om, val = parts(x)
		dphi_ds = np.where(inside, -val / om**2, 0.0)
		return (dphi_ds * 2.0 / R2)[..., None] * d

	def laplacian(x: np.ndarray) -> np.ndarray:
		d, inside, om, val = parts(x)
		n = d.shape[-1]
		dphi_ds = np.where(inside, -val / om**2, 0.0)
		d2phi_ds2 = np.where(inside, val * (1.0 / om**4 - 2.0 / om**3), 0.0)
		grad_s_sq = 4.0 * np.sum(d**2, axis=-1) / R2**2
		return d2phi_ds2 * grad_s_sq + dphi_ds * 2.0 * n / R2

	return TestFunction("gauss_bump", c, float(radius), phi, grad, laplacian)


def _smootherstep(t: np.ndarray):
	"""Degree-7 step S with S, S', S'' and S''' matching 0 and 1 at the ends."""
	S = t**4 * (35.0 - 84.0 * t + 70.0 * t**2 - 20.0 * t**3)
	dS = 140.0 * t**3 * (1.0 - t)**3
	d2S = 420.0 * t**2 * (1.0 - t)**2 * (1.0 - 2.0 * t)
	return S, dS, d2S


def poly_bump(center=0.0,
              radius: float = 3.0,
              plateau: float | None = None) -> TestFunction:
	"""Flat-top polynomial bump.

	Equal to 1 within ``plateau`` of the center (default ``radius / 2``),
	falling to 0 at ``radius`` through a C^3 polynomial step.
	"""
	c = np.atleast_1d(np.asarray(center, dtype=float))
	R = float(radius)
	r0 = R / 2.0 if plateau is None else float(plateau)
	if not 0.0 <= r0 < R:
		raise ValueError("plateau must lie in [0, radius)")
	width = R - r0

	def parts(x: np.ndarray):
		d = _offset(x, c)
		rho = np.sqrt(np.sum(d**2, axis=-1))
		t = np.clip((rho - r0) / width, 0.0, 1.0)
		S, dS, d2S = _smootherstep(t)
		return d, rho, S, dS / width, d2S / width**2

	def phi(x: np.ndarray) -> np.ndarray:
		return 1.0 - parts(x)[2]

	def grad(x: np.ndarray) -> np.ndarray:
		d, rho, _, dS, _ = parts(x)
		safe = np.where(rho > 0.0, rho, 1.0)
		return (-dS / safe)[..., None] * d

	def laplacian(x: np.ndarray) -> np.ndarray:
		d, rho, _, dS, d2S = parts(x)
		n = d.shape[-1]
		safe = np.where(rho > 0.0, rho, 1.0)
		return -(d2S + (n - 1) * dS / safe)

	return TestFunction("poly_bump", c, R, phi, grad, laplacian)


_BUMPS: dict[str, Callable[..., TestFunction]] = {
    "gauss_bump": gauss_bump,
    "poly_bump": poly_bump,
}


def build_test_function(name: str, **params) -> TestFunction:
	"""Instantiate a test function by id."""
	try:
		return _BUMPS[name](**params)
	except KeyError:
		raise ValueError(f"unknown test function {name!r}") from None


__all__ = ["TestFunction", "build_test_function", "gauss_bump", "poly_bump"]
