import numpy as np
import pytest
from scipy import integrate, stats

from ridge_lab.core.accept import BARKER, METROPOLIS_HASTINGS
from ridge_lab.core.quadrature import mh_gaussian_a0
from ridge_lab.core.rwm import (ChainState, Ensemble, InterpolatedEll,
                                ProposalRule, StepMode, acceptance_log_ratio,
                                run_chain, run_coupled_chains,
                                run_coupled_replicas, run_ensemble,
                                run_pinned_chain, step, tanh_ell)
from ridge_lab.core.targets import (curved_ridge, gauss_ridge, product_ridge,
                                    sample_stationary)


def test_step_sizes():
	assert ProposalRule().step_size(0.1) == pytest.approx(0.1)
	assert ProposalRule(step_mode="unit").step_size(0.1) == 1.0
	rule = ProposalRule(step_mode=StepMode.CUSTOM_EXPONENT, kappa=0.5)
	assert rule.step_size(0.04) == pytest.approx(0.2)


def test_rule_validation():
	with pytest.raises(ValueError):
		ProposalRule(step_mode="custom_exponent")
	with pytest.raises(ValueError):
		ProposalRule(ell=-1.0)
	with pytest.raises(ValueError):
		ProposalRule(ell_min=2.0, ell_max=1.0)


def test_ell_at_clamps_and_differentiates():
	ell, grad = tanh_ell(1.0, 0.5)
	rule = ProposalRule(ell=ell, grad_ell=grad, ell_min=0.8)
	x = np.array([[-5.0], [0.0], [5.0]])
	vals = rule.ell_at(x)
	assert vals[0] == pytest.approx(0.8)
	assert vals[1] == pytest.approx(1.0)
	g = rule.ell_gradient(x)
	# clamped below, so flat there
	assert g[0, 0] == 0.0
	assert g[1, 0] == pytest.approx(0.5)
	fd = ProposalRule(ell=ell).ell_gradient(np.array([[0.3]]))
	assert fd[0, 0] == pytest.approx(0.5 / np.cosh(0.3)**2, rel=1e-6)


def test_interpolated_ell():
	interp = InterpolatedEll([0.0, 1.0, 2.0], [1.0, 2.0, 2.0])
	assert interp(np.array([[0.5]]))[0] == pytest.approx(1.5)
	assert interp(np.array([[9.0]]))[0] == pytest.approx(2.0)
	assert interp.gradient(np.array([[0.5]]))[0, 0] == pytest.approx(1.0)
	assert interp.gradient(np.array([[-1.0]]))[0, 0] == 0.0
	with pytest.raises(ValueError):
		InterpolatedEll([0.0, 0.0], [1.0, 1.0])


def test_log_ratio_is_antisymmetric_with_position_dependent_ell():
	t = curved_ridge(0.1)
	ell, grad = tanh_ell(1.0, 0.5)
	rule = ProposalRule(ell=ell, grad_ell=grad)
	x, u = np.array([0.4]), np.array([0.3])
	dx, du = np.array([0.05]), np.array([-0.7])
	fwd = acceptance_log_ratio(t, x, u, dx, du, rule=rule)
	back = acceptance_log_ratio(t, x + dx, u + du, -dx, -du, rule=rule)
	assert fwd == pytest.approx(-back, abs=1e-12)


def test_run_chain_is_deterministic():
	t = gauss_ridge(0.1)
	rule = ProposalRule(ell=1.0)
	a = run_chain(t, rule, BARKER, 500, ([0.0], [0.0]), 5,
	              np.random.default_rng(11))
	b = run_chain(t, rule, BARKER, 500, ([0.0], [0.0]), 5,
	              np.random.default_rng(11))
	assert np.array_equal(a.x, b.x)
	assert a.x.shape == (101, 1)
	assert a.iterations[-1] == 500
	assert a.n_accepted == b.n_accepted


def test_step_matches_run_chain():
	t = curved_ridge(0.2)
	rule = ProposalRule(ell=1.3)
	state = ChainState(np.array([0.5]), np.array([-0.2]))
	one = step(state, t, rule, METROPOLIS_HASTINGS, np.random.default_rng(5))
	traj = run_chain(t, rule, METROPOLIS_HASTINGS, 1, state, 1,
	                 np.random.default_rng(5))
	assert np.array_equal(one.x, traj.x[-1])
	assert np.array_equal(one.u, traj.u[-1])
	assert one.iteration == 1


def test_ensemble_chains_match_single_runs():
	t = curved_ridge(0.1)
	rule = ProposalRule(ell=1.0)
	seeds = [1, 2, 3]
	ens = run_ensemble(t, rule, BARKER, 300, np.zeros((3, 1)),
	                   np.zeros((3, 1)),
	                   [np.random.default_rng(s) for s in seeds])
	for i, s in enumerate(seeds):
		single = run_chain(t, rule, BARKER, 300, ([0.0], [0.0]), 1,
		                   np.random.default_rng(s))
		assert np.array_equal(ens.chain(i).x, single.x)
	joined = Ensemble.concatenate([ens, ens])
	assert joined.n_chains == 6


def test_unit_acceptance_decays_with_epsilon():
	rule = ProposalRule(step_mode="unit", ell=1.0)
	rates = []
	for eps in (0.5, 0.05):
		t = gauss_ridge(eps)
		traj = run_chain(t, rule, METROPOLIS_HASTINGS, 4000, ([0.0], [0.0]),
		                 1, np.random.default_rng(2))
		rates.append(traj.mean_accept_prob)
	assert rates[1] < rates[0]
	assert rates[1] < 0.2


def test_pinned_chain_acceptance_matches_closed_form():
	t = gauss_ridge()
	traj = run_pinned_chain(t, [0.0], 1.0, METROPOLIS_HASTINGS, 40_000,
	                        [0.0], np.random.default_rng(8))
	assert traj.n_steps == 40_000
	assert traj.accept_probs[2000:].mean() == pytest.approx(
	    mh_gaussian_a0(1.0), abs=0.03)


def test_coupled_chains_never_decouple_at_zero_epsilon():
	t = gauss_ridge()
	run = run_coupled_chains(t, 0.0, 1.0, METROPOLIS_HASTINGS, 200,
	                         ([0.3], [0.1]), np.random.default_rng(4))
	assert run.decouple_index == 201
	assert np.all(run.full_x == 0.3)
	assert np.array_equal(run.full_u, run.pinned_u)


def test_coupled_replicas_decouple_sooner_at_larger_epsilon():
	t = curved_ridge()
	m = 400

	def mean_index(eps):
		rngs = [np.random.default_rng(100 + i) for i in range(m)]
		idx = run_coupled_replicas(t, eps, 1.0, METROPOLIS_HASTINGS, 200,
		                           np.full((m, 1), 1.0), np.zeros((m, 1)),
		                           rngs)
		return idx.mean()

	assert mean_index(0.2) < mean_index(0.01)


# ── stationarity ─────────────────────────────────────────────────────


def _conditional_u2(target) -> float:
	"""E[u_1^2] under the standardized law, by Gauss-Hermite over x."""
	if target.name == "gauss_ridge":
		return 1.0
	nodes, weights = np.polynomial.hermite_e.hermegauss(80)
	return float(weights @ (1.0 / (1.0 + nodes**2)) / np.sqrt(2.0 * np.pi))


def _run_from_stationary(target, rule, F, n_chains, n_steps, seed):
	rng = np.random.default_rng(seed)
	x0, u0 = sample_stationary(target, n_chains, rng)
	rngs = [np.random.default_rng([seed, i]) for i in range(n_chains)]
	return run_ensemble(target, rule, F, n_steps, x0, u0, rngs,
	                    thinning=n_steps)


def _assert_moments(ens, target):
	x_end = ens.x[:, -1, 0]
	u_end = ens.u[:, -1, 0]
	expected = [(x_end, 0.0), (x_end**2, 1.0), (u_end, 0.0),
	            (u_end**2, _conditional_u2(target))]
	for values, mean in expected:
		se = values.std(ddof=1) / np.sqrt(values.size)
		assert abs(values.mean() - mean) <= 4.0 * se


@pytest.mark.parametrize("step_mode", ["epsilon_scaled", "unit"])
@pytest.mark.parametrize("F", [BARKER, METROPOLIS_HASTINGS],
                         ids=["barker", "mh"])
@pytest.mark.parametrize("make_target", [
    lambda: gauss_ridge(0.1),
    lambda: curved_ridge(0.1),
    lambda: product_ridge(2, 0.1),
],
                         ids=["gauss", "curved", "product2"])
def test_chains_preserve_the_stationary_law(make_target, F, step_mode):
	t = make_target()
	ens = _run_from_stationary(t, ProposalRule(step_mode=step_mode, ell=1.0),
	                           F, 2000, 400, 21)
	assert ens.x.shape == (2000, 2, 1)
	_assert_moments(ens, t)


@pytest.mark.parametrize("F", [BARKER, METROPOLIS_HASTINGS],
                         ids=["barker", "mh"])
def test_position_dependent_ell_preserves_the_stationary_law(F):
	# the Hastings term for ell(x) = 1 + tanh(x) / 2 is needed here
	t = curved_ridge(0.1)
	ell, grad = tanh_ell(1.0, 0.5)
	rule = ProposalRule(ell=ell, grad_ell=grad)
	ens = _run_from_stationary(t, rule, F, 2000, 400, 22)
	_assert_moments(ens, t)


def _unit_mh_acceptance(ell: float, eps: float) -> float:
	"""Stationary MH acceptance on gauss_ridge with h = 1.

	For a symmetric proposal the stationary acceptance is 2 P(r > 0); with a
	Gaussian target and increment D that is 2 E[Phi(-|D| / 2)].
	"""
	nodes, weights = np.polynomial.hermite_e.hermegauss(40)
	inner = []
	for zx in nodes:
		value, _ = integrate.quad(
		    lambda zy: stats.norm.pdf(zy) * stats.norm.cdf(
		        -0.5 * ell * np.hypot(zx, zy / eps)),
		    -1.0,
		    1.0,
		    points=[0.0],
		    limit=200)
		inner.append(value)
	return float(2.0 * weights @ np.array(inner) / np.sqrt(2.0 * np.pi))


def test_unit_mode_acceptance_at_small_epsilon():
	t = gauss_ridge(0.01)
	ens = _run_from_stationary(t, ProposalRule(step_mode="unit", ell=1.0),
	                           METROPOLIS_HASTINGS, 200, 2000, 23)
	per_chain = ens.accept_prob_sum / ens.n_steps
	se = per_chain.std(ddof=1) / np.sqrt(per_chain.size)
	exact = _unit_mh_acceptance(1.0, 0.01)
	# acceptance is of order eps when h does not shrink
	assert 0.002 < exact < 0.05
	assert abs(per_chain.mean() - exact) <= 4.0 * se
