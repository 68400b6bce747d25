import numpy as np
import pytest

from ridge_lab.core.accept import BARKER, METROPOLIS_HASTINGS
from ridge_lab.core.bumps import gauss_bump
from ridge_lab.core.diagnostics import scaling_fit
from ridge_lab.core.diffusion import (A0Estimator, A0Lattice, DiffusionModel,
                                      VolatilityTable,
                                      averaging_identity_check, drift,
                                      euler_maruyama, half_identities,
                                      limit_operator_A_phi,
                                      one_step_generator, optimal_ell,
                                      optimal_ell_profile, sigma2,
                                      simulate_diffusion, speed_gain)
from ridge_lab.core.quadrature import a0_quadrature, mh_gaussian_a0
from ridge_lab.core.rwm import ProposalRule, tanh_ell
from ridge_lab.core.targets import curved_ridge, gauss_ridge, product_ridge
from ridge_lab.errors import IntegrationBlowup, NonDifferentiableError

# ── a0 ───────────────────────────────────────────────────────────────


def test_exact_estimator_matches_closed_form():
	est = A0Estimator(gauss_ridge(), METROPOLIS_HASTINGS, seed=3)
	value, se = est.estimate([0.0], 1.0)
	assert se > 0
	assert abs(value - mh_gaussian_a0(1.0)) < 5 * se


def test_estimator_caches_and_validates():
	est = A0Estimator(gauss_ridge(), BARKER, n_mc=1000)
	first = est.estimate([0.2], 1.5)
	assert est.estimate([0.2], 1.5) is first
	with pytest.raises(ValueError):
		est.estimate([0.2], 0.0)
	with pytest.raises(ValueError):
		A0Estimator(gauss_ridge(), BARKER, method="guess")


def test_pinned_estimator_agrees_with_exact():
	t = curved_ridge()
	exact = A0Estimator(t, METROPOLIS_HASTINGS, n_mc=20_000, seed=1)
	pinned = A0Estimator(t,
	                     METROPOLIS_HASTINGS,
	                     method="pinned_ergodic",
	                     n_mc=20_000,
	                     burn_in=2_000,
	                     seed=1)
	a = exact.estimate([0.5], 1.0)
	b = pinned.estimate([0.5], 1.0)
	assert a.value == pytest.approx(b.value, abs=0.03)


def test_lattice_csv_and_interpolation(tmp_path):
	est = A0Estimator(curved_ridge(), BARKER, n_mc=500)
	lattice = A0Lattice.build(est, [0.0, 1.0], [1.0, 2.0])
	assert lattice.values.shape == (2, 2)
	path = tmp_path / "a0.csv"
	lattice.to_csv(path)
	back = A0Lattice.from_csv(path)
	assert np.array_equal(back.values, lattice.values)
	mid = lattice.interpolate([0.5], 1.5).value
	assert mid == pytest.approx(lattice.values.mean())
	assert lattice.covers([0.5], 1.5)
	assert not lattice.covers([2.0], 1.5)


def test_lattice_csv_must_be_full_grid(tmp_path):
	path = tmp_path / "partial.csv"
	path.write_text("x,ell,estimate,se\n0,1,0.5,0.01\n1,2,0.4,0.01\n")
	with pytest.raises(ValueError):
		A0Lattice.from_csv(path)


def test_sigma2_and_drift_for_gaussian_ridge():
	model = DiffusionModel(gauss_ridge(), ProposalRule(ell=2.0),
	                       A0Estimator(gauss_ridge(), METROPOLIS_HASTINGS))
	s2 = sigma2(model, [0.7])
	a0 = model.a0.estimate([0.7], 2.0).value
	assert s2.value == pytest.approx(4.0 * a0)
	# common random numbers make sigma2 flat in x here
	assert drift(model, [0.7])[0] == pytest.approx(-0.5 * s2.value * 0.7)


# ── SDE ──────────────────────────────────────────────────────────────


def test_euler_maruyama_keeps_standard_normal():
	rng = np.random.default_rng(9)
	x0 = rng.standard_normal((4000, 1))
	paths = euler_maruyama(lambda x: -0.5 * x,
	                       lambda x: np.ones(x.shape[0]),
	                       x0,
	                       1.0,
	                       0.01,
	                       rng,
	                       record_every=10)
	assert paths.x.shape == (4000, 11, 1)
	assert paths.times[-1] == pytest.approx(1.0)
	assert paths.at_time(1.0).var() == pytest.approx(1.0, rel=0.1)


def test_euler_maruyama_reports_blowup():
	with pytest.raises(IntegrationBlowup) as info:
		euler_maruyama(lambda x: np.full_like(x, np.inf),
		               lambda x: np.ones(x.shape[0]), np.zeros((3, 1)), 1.0,
		               0.1, np.random.default_rng(0))
	assert info.value.step == 1


def test_simulate_diffusion_from_stationary_start():
	t = gauss_ridge()
	model = DiffusionModel(t, ProposalRule(ell=1.0),
	                       A0Estimator(t, METROPOLIS_HASTINGS, n_mc=5000))
	paths = simulate_diffusion(model,
	                           1.0,
	                           0.01,
	                           3000,
	                           None,
	                           np.random.default_rng(4),
	                           x_grid=np.linspace(-4.0, 4.0, 33),
	                           record_every=10)
	assert paths.x.shape == (3000, 11, 1)
	assert paths.dt == 0.01
	end = paths.at_time(1.0)
	assert abs(end.mean()) < 0.1
	assert end.var() == pytest.approx(1.0, rel=0.1)


def test_simulate_diffusion_fixed_start_and_validation():
	t = gauss_ridge()
	model = DiffusionModel(t, ProposalRule(ell=1.0),
	                       A0Estimator(t, METROPOLIS_HASTINGS, n_mc=2000))
	grid = np.linspace(-3.0, 3.0, 13)
	paths = simulate_diffusion(model, 0.1, None, 5, [0.5],
	                           np.random.default_rng(0), x_grid=grid)
	assert np.all(paths.x[:, 0, 0] == 0.5)
	assert paths.dt <= 1e-3
	with pytest.raises(ValueError):
		simulate_diffusion(model, 0.1, 0.01, 0, [0.5],
		                   np.random.default_rng(0), x_grid=grid)

def test_volatility_table_from_constant():
	table = VolatilityTable.from_function(lambda x: 2.0, lambda x: -x,
	                                      np.linspace(-3, 3, 31))
	x = np.array([[1.0], [10.0]])
	assert np.allclose(table.sigma2_at(x), 2.0)
	assert np.allclose(table.drift_at(x)[:, 0], [-1.0, -10.0])
	assert table.sigma2_max == pytest.approx(2.0)


# ── optimal ell ──────────────────────────────────────────────────────


def test_optimal_ell_interior_for_three_fast_coordinates():
	t = product_ridge(3)
	model = DiffusionModel(t, ProposalRule(),
	                       A0Estimator(t, METROPOLIS_HASTINGS, n_mc=5000))
	grid = np.linspace(0.25, 4.0, 16)
	res = optimal_ell(model, [0.0], grid)
	assert not res.at_boundary
	assert grid[0] < res.ell < grid[-1]
	assert res.speed == pytest.approx(res.ell**2 * res.a0)


def test_optimal_ell_boundary_for_one_gaussian_coordinate():
	t = gauss_ridge()
	model = DiffusionModel(t, ProposalRule(),
	                       A0Estimator(t, METROPOLIS_HASTINGS, n_mc=5000))
	res = optimal_ell(model, [0.0], [0.5, 1.0, 2.0, 4.0])
	assert res.at_boundary
	assert res.ell == 4.0
	assert res.warnings


def test_profile_shrinks_away_from_ridge_and_beats_constant_ell():
	t = product_ridge(3)
	model = DiffusionModel(t, ProposalRule(),
	                       A0Estimator(t, METROPOLIS_HASTINGS, n_mc=5000))
	profile = optimal_ell_profile(model, [0.0, 1.0, 2.0],
	                              np.linspace(0.1, 4.0, 40))
	assert not profile.boundary.any()
	assert profile.ell_star[0] > profile.ell_star[1] > profile.ell_star[2]
	gain = speed_gain(model, profile)
	assert gain.gain >= 0.999
	rule = profile.as_rule()
	assert rule.position_dependent


# ── generators and identities ────────────────────────────────────────


def test_limit_operator_needs_smooth_accept():
	with pytest.raises(NonDifferentiableError):
		limit_operator_A_phi(gauss_ridge(), gauss_bump(), [0.0], [0.0], 1.0,
		                     METROPOLIS_HASTINGS, 10,
		                     np.random.default_rng(0))


def test_one_step_generator_approaches_limit_operator():
	t = gauss_ridge()
	phi = gauss_bump(0.0, 3.0)
	limit = limit_operator_A_phi(t, phi, [0.5], [0.2], 1.0, BARKER, 20_000,
	                             np.random.default_rng(6))
	prelimit = one_step_generator(t, 0.01, phi, [0.5], [0.2], 1.0, BARKER,
	                              20_000, np.random.default_rng(6))
	assert prelimit == pytest.approx(limit, abs=0.05)


@pytest.mark.parametrize("F", [BARKER, METROPOLIS_HASTINGS])
def test_averaging_identity(F):
	ell, grad = tanh_ell(1.0, 0.5)
	rule = ProposalRule(ell=ell, grad_ell=grad)
	check = averaging_identity_check(curved_ridge(), gauss_bump(0.0, 3.0),
	                                 [0.5], rule, F)
	assert check.passed
	assert check.gap < 5e-3


def test_half_identities():
	res = half_identities(curved_ridge(), BARKER, [0.5], 1.0)
	assert max(res.gaps) < 1e-3
	# the first identity reads E[F'(DB)] = a0 / 2
	a0 = a0_quadrature(curved_ridge(), BARKER, [0.5], 1.0)
	assert res.half_a0 == pytest.approx(0.5 * a0)


def test_generator_gap_decays_at_second_order():
	# symmetric quadrature over Z_x cancels the odd powers of eps
	t = curved_ridge()
	phi = gauss_bump(0.0, 3.0)
	pairs = []
	for eps in (0.1, 0.05, 0.025):
		prelimit = one_step_generator(t, eps, phi, [0.5], [0.3], 1.0, BARKER,
		                              5000, np.random.default_rng(11))
		limit = limit_operator_A_phi(t, phi, [0.5], [0.3], 1.0, BARKER, 5000,
		                             np.random.default_rng(11))
		pairs.append((eps, abs(prelimit - limit)))
	assert scaling_fit(pairs).slope == pytest.approx(2.0, abs=0.3)
