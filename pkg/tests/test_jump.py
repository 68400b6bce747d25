import numpy as np
import pytest

from ridge_lab.core.accept import METROPOLIS_HASTINGS
from ridge_lab.core.bumps import gauss_bump
from ridge_lab.core.jump import (JumpModel, accelerated_prelimit,
                                 complexity_comparison, first_prelimit_jump,
                                 jump_generator, jump_rate,
                                 jump_rate_quadrature,
                                 kernel_x_marginal_quadrature,
                                 prelimit_jump_generator, q_density,
                                 rate_bound, sample_next_jump,
                                 simulate_jump_process)
from ridge_lab.core.targets import gauss_ridge, product_ridge
from ridge_lab.errors import DimensionError, ResamplingFailure


@pytest.fixture
def jm():
	return JumpModel(gauss_ridge(0.05), 1.0, METROPOLIS_HASTINGS,
	                 rate_mc=40_000)


def test_model_validation():
	with pytest.raises(ValueError):
		JumpModel(gauss_ridge(), 0.0, METROPOLIS_HASTINGS)
	with pytest.raises(ValueError):
		JumpModel(gauss_ridge(), 1.0, METROPOLIS_HASTINGS, rate_mc=1)


def test_rate_matches_quadrature_and_bound(jm):
	est = jump_rate(jm, [0.0], [0.0], np.random.default_rng(1))
	ref = jump_rate_quadrature(jm, [0.0], [0.0])
	assert abs(est.value - ref) <= 5 * est.se + 0.01 * ref
	assert est.value < rate_bound(jm, [0.0], [0.0])


def test_q_density_is_nonnegative(jm):
	q = q_density(jm, [0.0], [0.0], np.array([[0.5], [-1.0]]),
	              np.array([[0.2], [3.0]]))
	assert q.shape == (2,)
	assert np.all(q >= 0)


def test_next_jump_needs_positive_rate(jm):
	with pytest.raises(ResamplingFailure):
		sample_next_jump(jm, [0.0], [0.0], np.random.default_rng(0), rate=0.0)
	event = sample_next_jump(jm, [0.0], [0.0], np.random.default_rng(0))
	assert event.holding_time > 0
	assert event.x.shape == (1,)


def test_simulated_path_stays_in_window(jm):
	path = simulate_jump_process(jm, 3.0, ([0.0], [0.0]),
	                             np.random.default_rng(2))
	assert path.times[0] == 0.0
	assert np.all(np.diff(path.times) > 0)
	assert path.times[-1] <= 3.0
	assert path.x.shape == (path.n_events + 1, 1)


def test_first_prelimit_jump():
	t = gauss_ridge()
	assert first_prelimit_jump(t, 0.05, 1.0, METROPOLIS_HASTINGS, [0.0],
	                           [0.0], np.random.default_rng(0), 0) is None
	a = first_prelimit_jump(t, 0.05, 1.0, METROPOLIS_HASTINGS, [0.0], [0.0],
	                        np.random.default_rng(3), 10_000)
	b = first_prelimit_jump(t, 0.05, 1.0, METROPOLIS_HASTINGS, [0.0], [0.0],
	                        np.random.default_rng(3), 10_000)
	assert a is not None
	assert a.steps == b.steps >= 1
	assert np.array_equal(a.u, b.u)


def test_prelimit_holding_time_matches_rate(jm):
	eps = jm.target.epsilon
	rate = jump_rate_quadrature(jm, [0.0], [0.0])
	rng = np.random.default_rng(4)
	steps = []
	for _ in range(1000):
		jump = first_prelimit_jump(jm.target, eps, 1.0, METROPOLIS_HASTINGS,
		                           [0.0], [0.0], rng, 100_000)
		steps.append(jump.steps)
	mean_time = np.mean(steps) * eps
	assert mean_time * rate == pytest.approx(1.0, abs=0.15)


def test_accelerated_prelimit_event_times():
	t = gauss_ridge()
	path = accelerated_prelimit(t, 0.1, 1.0, METROPOLIS_HASTINGS, 2.0,
	                            ([0.0], [0.0]), np.random.default_rng(5))
	assert path.n_steps == 20
	assert path.n_accepted == path.n_events
	assert np.allclose(path.times / 0.1, np.round(path.times / 0.1))
	assert path.times[-1] <= 2.0 + 1e-12


def test_kernel_marginal_is_a_distribution(jm):
	km = kernel_x_marginal_quadrature(jm, [0.0], [0.0], n_nodes=401)
	assert km.cdf_values[0] == 0.0
	assert km.cdf_values[-1] == pytest.approx(1.0)
	assert np.all(np.diff(km.cdf_values) >= 0)
	assert km.cdf(0.0) == pytest.approx(0.5, abs=0.01)


def test_quadrature_needs_scalar_coordinates():
	jm = JumpModel(product_ridge(2), 1.0, METROPOLIS_HASTINGS)
	with pytest.raises(DimensionError):
		jump_rate_quadrature(jm, [0.0], [0.0, 0.0])


# ── generators ───────────────────────────────────────────────────────


def _phi_xu():
	in_x = gauss_bump(0.0, 3.0)
	in_u = gauss_bump(0.0, 4.0)
	return lambda x, u: in_x(x) * in_u(u)


@pytest.mark.parametrize("x, u", [(0.0, 0.0), (0.5, -1.0), (-1.0, 1.5)])
def test_prelimit_generator_matches_jump_generator(x, u):
	t = gauss_ridge(0.02)
	jm = JumpModel(t, 1.0, METROPOLIS_HASTINGS)
	phi = _phi_xu()
	lim = jump_generator(jm, phi, [x], [u], 40_000, np.random.default_rng(6))
	pre = prelimit_jump_generator(t, 0.02, 1.0, METROPOLIS_HASTINGS, phi, [x],
	                              [u], 40_000, np.random.default_rng(7))
	assert lim.se > 0 and pre.se > 0
	assert abs(lim.value - pre.value) <= 4.0 * np.hypot(lim.se, pre.se)


def test_jump_generator_vanishes_on_constants(jm):
	est = jump_generator(jm, lambda x, u: np.ones(np.shape(x)[:-1]), [0.3],
	                     [0.1], 1000, np.random.default_rng(0))
	assert est.value == 0.0
	pre = prelimit_jump_generator(jm.target, 0.05, 1.0, METROPOLIS_HASTINGS,
	                              lambda x, u: np.ones(np.shape(x)[:-1]),
	                              [0.3], [0.1], 1000,
	                              np.random.default_rng(0))
	assert pre.value == 0.0


# ── complexity ───────────────────────────────────────────────────────


def test_complexity_comparison_tabulates_both_modes():
	res = complexity_comparison(product_ridge(1),
	                            [0.4, 0.2, 0.1],
	                            ell=1.0,
	                            F=METROPOLIS_HASTINGS,
	                            n_chains=8,
	                            base_steps=200,
	                            seed=3)
	assert res.table.modes() == ["epsilon_scaled", "unit"]
	assert [r.epsilon for r in res.table.select("unit")] == [0.1, 0.2, 0.4]
	assert set(res.fits) == {"unit", "epsilon_scaled"}
	assert all(r.statistic > 0 for r in res.table.rows)
	# h = eps makes the slow coordinate diffusive: IACT grows as eps^-2
	assert res.fits["epsilon_scaled"].slope < -1.0


def test_complexity_comparison_needs_three_epsilons():
	with pytest.raises(ValueError):
		complexity_comparison(product_ridge(1), [0.2, 0.1],
		                      ell=1.0,
		                      F=METROPOLIS_HASTINGS,
		                      n_chains=2,
		                      base_steps=10,
		                      seed=0)
