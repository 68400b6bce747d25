"""
Accept/reject functions.

An accept function F maps the log target ratio r of a proposed move to
an acceptance probability. Detailed balance holds whenever
``exp(r) * F(-r) == F(r)``. Two builtins ship: the Metropolis-Hastings
rule ``min(1, e^r)`` and the smooth Barker rule ``e^r / (1 + e^r)``.
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from ridge_lab.errors import NonDifferentiableError
from ridge_lab.utils.logging import get_logger

logger = get_logger(__name__)

REVERSIBILITY_GRID = np.round(np.arange(-10.0, 10.0 + 1e-9, 0.01), 10)
REGISTRATION_TOLERANCE = 1e-9


@dataclass(frozen=True)
class AcceptFunction:
	"""An accept function with its derivative.

	``smooth`` is False when F has a kink (the MH rule at r = 0); limit
	operators that need F' everywhere reject such functions.
	"""

	name: str
	evaluate_fn: Callable[[np.ndarray], np.ndarray]
	derivative_fn: Callable[[np.ndarray], np.ndarray]
	smooth: bool

	def __call__(self, r):
		return evaluate(self, r)


def _mh(r: np.ndarray) -> np.ndarray:
	return np.exp(np.minimum(r, 0.0))


def _mh_prime(r: np.ndarray) -> np.ndarray:
	return np.where(r < 0.0, np.exp(np.minimum(r, 0.0)), 0.0)


def _barker(r: np.ndarray) -> np.ndarray:
	return expit(r)


def _barker_prime(r: np.ndarray) -> np.ndarray:
	return expit(r) * expit(-r)


METROPOLIS_HASTINGS = AcceptFunction("metropolis_hastings", _mh, _mh_prime,
                                     smooth=False)
BARKER = AcceptFunction("barker", _barker, _barker_prime, smooth=True)

_REGISTRY: dict[str, AcceptFunction] = {
    METROPOLIS_HASTINGS.name: METROPOLIS_HASTINGS,
    BARKER.name: BARKER,
}


def _as_float(value) -> np.ndarray:
	return np.asarray(value, dtype=float)


def _unwrap(value: np.ndarray):
	return float(value) if value.ndim == 0 else value


def evaluate(F: AcceptFunction, r):
	"""Acceptance probability F(r).

	Raises:
		ValueError: If ``r`` contains NaN.
	"""
	arr = _as_float(r)
	if np.isnan(arr).any():
		raise ValueError("accept function argument is NaN")
	return _unwrap(np.asarray(F.evaluate_fn(arr), dtype=float))


def derivative(F: AcceptFunction, r, *, almost_everywhere: bool = False):
	"""Derivative F'(r).

	For the MH rule F' is ``e^r`` below zero and ``0`` above, and is
	undefined at zero. With ``almost_everywhere`` the value 0 is used
	there; integrals against a continuous law of r do not see it.

	Raises:
		NonDifferentiableError: At r == 0 for a non-smooth F, unless
			``almost_everywhere`` is set.
		ValueError: If ``r`` contains NaN.
	"""
	arr = _as_float(r)
	if np.isnan(arr).any():
		raise ValueError("accept function argument is NaN")
	if not F.smooth and not almost_everywhere and (arr == 0.0).any():
		raise NonDifferentiableError(
		    f"{F.name} is not differentiable at r = 0")
	return _unwrap(np.asarray(F.derivative_fn(arr), dtype=float))


def check_reversibility(F: AcceptFunction, grid=REVERSIBILITY_GRID) -> float:
	"""Largest violation of ``e^r F(-r) = F(r)`` on ``grid``."""
	r = _as_float(grid)
	lhs = np.exp(r) * np.asarray(F.evaluate_fn(-r), dtype=float)
	rhs = np.asarray(F.evaluate_fn(r), dtype=float)
	return float(np.max(np.abs(lhs - rhs))) if r.size else 0.0


def get_accept(name: str) -> AcceptFunction:
	"""Look up a registered accept function by name."""
	try:
		return _REGISTRY[name]
	except KeyError:
		raise ValueError(f"unknown accept function {name!r}; known: "
		                 f"{', '.join(sorted(_REGISTRY))}") from None


def register_accept(name: str,
                    evaluate_fn: Callable[[np.ndarray], np.ndarray],
                    derivative_fn: Callable[[np.ndarray], np.ndarray],
                    smooth: bool = True) -> AcceptFunction:
	"""Register a user accept function after a reversibility check.

	Raises:
		ValueError: If the reversibility violation on [-10, 10] exceeds
			the registration tolerance.
	"""
	F = AcceptFunction(name, evaluate_fn, derivative_fn, smooth)
	violation = check_reversibility(F)
	if violation > REGISTRATION_TOLERANCE:
		raise ValueError(
		    f"accept function {name!r} violates e^r F(-r) = F(r) by "
		    f"{violation:.3e}")
	logger.debug("registered accept function %s (violation %.2e)", name,
	             violation)
	_REGISTRY[name] = F
	return F


__all__ = [
    "AcceptFunction",
    "BARKER",
    "METROPOLIS_HASTINGS",
    "check_reversibility",
    "derivative",
    "evaluate",
    "get_accept",
    "register_accept",
]
