import numpy as np
import pytest

from ridge_lab.core.accept import (BARKER, METROPOLIS_HASTINGS,
                                   check_reversibility, derivative, evaluate,
                                   get_accept, register_accept)
from ridge_lab.errors import NonDifferentiableError


@pytest.mark.parametrize("F", [METROPOLIS_HASTINGS, BARKER])
def test_builtins_are_reversible(F):
	assert check_reversibility(F) <= 1e-12


def test_mh_values():
	assert evaluate(METROPOLIS_HASTINGS, 0.0) == 1.0
	assert evaluate(METROPOLIS_HASTINGS, 3.0) == 1.0
	assert evaluate(METROPOLIS_HASTINGS, -1.0) == pytest.approx(np.exp(-1.0))


def test_barker_values():
	assert evaluate(BARKER, 0.0) == pytest.approx(0.5)
	r = np.array([-2.0, 1.0])
	assert np.allclose(BARKER(r), np.exp(r) / (1.0 + np.exp(r)))


def test_evaluate_rejects_nan():
	with pytest.raises(ValueError):
		evaluate(BARKER, float("nan"))


def test_mh_derivative_kink():
	with pytest.raises(NonDifferentiableError):
		derivative(METROPOLIS_HASTINGS, 0.0)
	assert derivative(METROPOLIS_HASTINGS, 0.0, almost_everywhere=True) == 0.0
	assert derivative(METROPOLIS_HASTINGS,
	                  -0.5) == pytest.approx(np.exp(-0.5))
	assert derivative(METROPOLIS_HASTINGS, 0.5) == 0.0


def test_barker_derivative_matches_finite_difference():
	r = np.linspace(-3.0, 3.0, 13)
	h = 1e-6
	fd = (BARKER(r + h) - BARKER(r - h)) / (2 * h)
	assert np.allclose(derivative(BARKER, r), fd, atol=1e-8)


def test_get_accept():
	assert get_accept("barker") is BARKER
	with pytest.raises(ValueError):
		get_accept("nope")


def test_register_accept_rejects_irreversible():
	with pytest.raises(ValueError):
		register_accept("always_half", lambda r: np.full_like(r, 0.5),
		                lambda r: np.zeros_like(r))


def test_register_accept_accepts_scaled_barker():
	F = register_accept("half_barker", lambda r: 0.5 * BARKER.evaluate_fn(r),
	                    lambda r: 0.5 * BARKER.derivative_fn(r))
	assert get_accept("half_barker") is F
