import numpy as np
import pytest

from ridge_lab.core.accept import BARKER, METROPOLIS_HASTINGS
from ridge_lab.core.quadrature import (a0_quadrature, conditional_grid,
                                       gauss_hermite, gauss_hermite_tensor,
                                       mh_gaussian_a0)
from ridge_lab.core.targets import curved_ridge, gauss_ridge, product_ridge
from ridge_lab.errors import UnsupportedTargetError


def test_gauss_hermite_moments():
	nodes, weights = gauss_hermite(20)
	assert weights.sum() == pytest.approx(1.0)
	assert weights @ nodes**2 == pytest.approx(1.0)
	assert weights @ nodes**4 == pytest.approx(3.0)


def test_tensor_rule_shape():
	pts, w = gauss_hermite_tensor(5, 2)
	assert pts.shape == (25, 2)
	assert w.sum() == pytest.approx(1.0)


def test_mh_gaussian_closed_form():
	assert mh_gaussian_a0(2.0) == pytest.approx(0.5)
	assert mh_gaussian_a0(1e-9) == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("ell", [0.5, 1.0, 2.4, 5.0])
def test_mh_quadrature_matches_closed_form(ell):
	t = gauss_ridge()
	assert a0_quadrature(t, METROPOLIS_HASTINGS, 0.0,
	                     ell) == pytest.approx(mh_gaussian_a0(ell), abs=2e-3)


def test_curved_ridge_scale_enters_closed_form():
	t = curved_ridge()
	# u | x=1 has standard deviation 1 / sqrt(2)
	value = a0_quadrature(t, METROPOLIS_HASTINGS, 1.0, 1.0)
	assert value == pytest.approx(mh_gaussian_a0(1.0, 1 / np.sqrt(2.0)),
	                              abs=2e-3)


def test_barker_below_mh():
	t = gauss_ridge()
	assert a0_quadrature(t, BARKER, 0.0, 1.0) < a0_quadrature(
	    t, METROPOLIS_HASTINGS, 0.0, 1.0)


def test_quadrature_needs_scalar_u():
	with pytest.raises(UnsupportedTargetError):
		conditional_grid(product_ridge(2), np.zeros(1))
