import numpy as np
import pytest

from ridge_lab.core.bumps import build_test_function, gauss_bump, poly_bump


def _fd_grad(fn, x, h=1e-5):
	out = np.zeros_like(x)
	for i in range(x.shape[-1]):
		e = np.zeros_like(x)
		e[..., i] = h
		out[..., i] = (fn(x + e) - fn(x - e)) / (2 * h)
	return out


def _fd_laplacian(fn, x, h=1e-4):
	total = -2.0 * x.shape[-1] * fn(x)
	for i in range(x.shape[-1]):
		e = np.zeros_like(x)
		e[..., i] = h
		total = total + fn(x + e) + fn(x - e)
	return total / h**2


@pytest.mark.parametrize("bump", [gauss_bump(0.0, 3.0), poly_bump(0.0, 3.0)])
def test_bump_support_and_peak(bump):
	assert bump(np.array([0.0])) == pytest.approx(1.0)
	assert bump(np.array([3.5])) == 0.0
	assert bump(np.array([-3.0])) == 0.0


@pytest.mark.parametrize("bump", [
    gauss_bump(np.zeros(2), 2.0),
    poly_bump(np.zeros(2), 2.0),
])
def test_bump_derivatives_match_finite_differences(bump):
	x = np.array([[0.3, -0.4], [1.2, 0.5], [-0.9, 0.9]])
	assert np.allclose(bump.grad(x), _fd_grad(bump.phi, x), atol=1e-6)
	assert np.allclose(bump.laplacian(x),
	                   _fd_laplacian(bump.phi, x),
	                   atol=1e-4)


def test_poly_bump_plateau_validation():
	with pytest.raises(ValueError):
		poly_bump(0.0, 1.0, plateau=1.0)


def test_build_test_function():
	assert build_test_function("gauss_bump", radius=2.0).radius == 2.0
	with pytest.raises(ValueError):
		build_test_function("sinc")
