"""
Diffusion-regime experiments (h = eps).
"""

from __future__ import annotations

import numpy as np

from ridge_lab.core.accept import BARKER, METROPOLIS_HASTINGS, check_reversibility
from ridge_lab.core.bumps import gauss_bump
from ridge_lab.core.diagnostics import esjd, ks_distance, mean_se, scaling_fit
from ridge_lab.core.diffusion import (A0Lattice, DiffusionModel,
                                      VolatilityTable,
                                      averaging_identity_check,
                                      half_identities, limit_operator_A_phi,
                                      one_step_generator, optimal_ell,
                                      optimal_ell_profile, sigma2,
                                      simulate_diffusion, speed_gain)
from ridge_lab.core.parallel import run_ensemble_blocks
from ridge_lab.core.quadrature import a0_quadrature
from ridge_lab.core.rwm import ProposalRule, run_coupled_replicas, tanh_ell
from ridge_lab.core.targets import build_target, sample_stationary
from ridge_lab.evals import checks
from ridge_lab.experiments.base import (ExperimentContext, ExperimentOutput,
                                        stationary_average)
from ridge_lab.utils.logging import get_logger
from ridge_lab.utils.rng import chain_streams

logger = get_logger(__name__)

DEFAULT_ELL_GRID = tuple(0.25 * k for k in range(1, 25))

# ── a0 ───────────────────────────────────────────────────────────────


def run_a0_map(ctx: ExperimentContext) -> ExperimentOutput:
	"""Cross-validate the two a0 estimators and tabulate an a0 lattice."""
	out = ExperimentOutput()
	t = ctx.target()
	exact = ctx.a0_estimator(t, method="exact_conditional")
	pinned = ctx.a0_estimator(t, method="pinned_ergodic")
	n_points = int(ctx.param("n_points", 20))
	rng = ctx.rng("a0-map-points")
	xs = rng.uniform(-3.0, 3.0, n_points)
	ells = rng.uniform(0.5, 3.0, n_points)
	agree = out.table("agreement", [
	    "x", "ell", "exact", "exact_se", "pinned", "pinned_se", "gap_se"
	])
	gaps = []
	for x, ell in zip(xs, ells):
		e = exact.estimate([x], ell)
		p = pinned.estimate([x], ell)
		out.warn(p.warnings)
		gap = abs(e.value - p.value) / np.hypot(e.se, p.se)
		gaps.append(gap)
		agree.add(float(x), float(ell), e.value, e.se, p.value, p.se, gap)
	out.check(
	    checks.agreement_count("a0_agreement", gaps, ctx.tol("a0_agreement_se"),
	                           int(ctx.tol("a0_max_misses"))))

	x_grid = ctx.param("x_grid", [-3, -2, -1, 0, 1, 2, 3])
	ell_grid = ctx.config.ells or list(DEFAULT_ELL_GRID)
	lattice = A0Lattice.build(exact, x_grid, ell_grid)
	table = out.table("a0_lattice", ["x", "ell", "estimate", "se"])
	for i, x in enumerate(lattice.x_grid):
		for j, ell in enumerate(lattice.ell_grid):
			table.add(float(x), float(ell), float(lattice.values[i, j]),
			          float(lattice.se[i, j]))
	out.summary.append({"points": n_points, "max_gap_se": float(max(gaps))})
	return out


# ── limiting SDE ─────────────────────────────────────────────────────


def _marginal_row(t: float, xs: np.ndarray) -> tuple:
	q05, q50, q95 = np.quantile(xs, [0.05, 0.5, 0.95])
	return (float(t), float(xs.mean()), float(xs.var()), float(q05),
	        float(q50), float(q95))


def run_limit_diffusion(ctx: ExperimentContext) -> ExperimentOutput:
	"""Tabulate sigma2 and simulate the limiting SDE from stationarity."""
	out = ExperimentOutput()
	t = ctx.target()
	rule = ctx.rule(t)
	model = DiffusionModel(t, rule, ctx.a0_estimator(t))
	grid = np.linspace(-6.0, 6.0, 121)
	table = VolatilityTable.from_model(model, grid)
	vol = out.table("volatility", ["x", "sigma2", "grad_sigma2", "drift"])
	drifts = table.drift_at(grid[:, None])[:, 0]
	for x, s2, g, d in zip(grid, table.sigma2, table.grad_sigma2, drifts):
		vol.add(float(x), float(s2), float(g), float(d))

	T = float(ctx.param("T", 2.0))
	n_paths = ctx.counts.chains
	paths = simulate_diffusion(model,
	                           T,
	                           None,
	                           n_paths,
	                           None,
	                           ctx.rng("limit-diffusion"),
	                           record_every=10,
	                           table=table)
	marg = out.table("marginals", ["t", "mean", "var", "q05", "q50", "q95"])
	for time in [0.0] + list(ctx.param("times", [0.5, 1.0, 2.0])):
		marg.add(*_marginal_row(time, paths.at_time(time)[:, 0]))
	final = paths.x[:, -1, 0]
	n = final.size
	n_se = ctx.tol("stationary_se")
	out.check(
	    checks.within_se("stationary_variance", float(final.var()), 1.0,
	                     np.sqrt(2.0 / n), n_se))
	out.check(
	    checks.within_se("stationary_mean", float(final.mean()), 0.0,
	                     1.0 / np.sqrt(n), n_se))
	out.summary.append({"dt": paths.dt, "T": T, "paths": n_paths,
	                    "sigma2_max": table.sigma2_max})
	return out


def run_compare_diffusion(ctx: ExperimentContext) -> ExperimentOutput:
	"""Stationary RWM chains against the Euler-Maruyama ensemble."""
	out = ExperimentOutput()
	t = ctx.target()
	eps = t.epsilon
	rule = ctx.rule(t)
	F = ctx.accept
	c = ctx.counts
	model = DiffusionModel(t, rule, ctx.a0_estimator(t))
	x0, u0 = sample_stationary(t, c.chains, ctx.rng("compare-init"))
	ens = run_ensemble_blocks(t,
	                          rule,
	                          F,
	                          c.steps,
	                          x0,
	                          u0,
	                          seed=ctx.seed,
	                          tag="compare-diffusion",
	                          thinning=c.thinning,
	                          block=ctx.block,
	                          parallelism=ctx.parallelism)
	unit_time = int(round(eps**-2))
	lag = unit_time // c.thinning
	if lag < 1 or lag >= ens.x.shape[1]:
		raise ValueError("steps and thinning must cover one unit of "
		                 "diffusion time")

	# autocorrelation of x at diffusion time 1, pooled over chains and origins
	xs = ens.x[:, :, 0]
	centred = xs - xs.mean()
	rho = float(np.sum(centred[:, :-lag] * centred[:, lag:]) /
	            np.sum(centred[:, :-lag]**2))
	constant = (t.name == "gauss_ridge" and not rule.position_dependent)
	ell0 = float(rule.ell_at(np.zeros(1)))
	if constant:
		s2 = ell0**2 * a0_quadrature(t, F, [0.0], ell0)
		predicted = float(np.exp(-0.5 * s2))
		out.check(
		    checks.within_tolerance("autocorrelation", rho, predicted,
		                            ctx.tol("autocorrelation")))
	else:
		predicted = float("nan")
		out.check(checks.report_only("autocorrelation", rho))

	paths = simulate_diffusion(model, 1.0, None, c.chains, x0,
	                           ctx.rng("compare-em"))
	chain_t1 = ens.x[:, lag, 0]
	em_t1 = paths.x[:, -1, 0]
	ks = ks_distance(chain_t1, em_t1)
	out.check(checks.ks_not_rejected("ks_t1", ks.pvalue, ctx.tol("ks_level")))

	# ESJD needs consecutive states
	n_short = min(c.chains, 64)
	short = run_ensemble_blocks(t,
	                            rule,
	                            F,
	                            min(c.steps, 2_000),
	                            x0[:n_short],
	                            u0[:n_short],
	                            seed=ctx.seed,
	                            tag="compare-esjd",
	                            block=ctx.block,
	                            parallelism=ctx.parallelism)
	speeds = mean_se([
	    esjd(short.chain(i), "x") / eps**2 for i in range(short.n_chains)
	])
	expected = stationary_average(t, lambda x: sigma2(model, [x]).value)
	out.check(
	    checks.within_se("speed_identity", speeds.value, expected, speeds.se,
	                     ctx.tol("speed_identity_se")))

	table = out.table("comparison", ["quantity", "chain", "limit", "se"])
	table.add("autocorrelation_t1", rho, predicted, float("nan"))
	table.add("ks_statistic_t1", ks.statistic, 0.0, float("nan"))
	table.add("esjd_over_eps2", speeds.value, expected, speeds.se)
	quant = out.table("t1_quantiles", ["q", "chain", "limit"])
	for q in (0.05, 0.25, 0.5, 0.75, 0.95):
		quant.add(q, float(np.quantile(chain_t1, q)),
		          float(np.quantile(em_t1, q)))
	out.summary.append({"lag_recorded": lag, "ks_pvalue": ks.pvalue,
	                    "acceptance_rate": ens.acceptance_rate})
	return out


# ── optimal ell ──────────────────────────────────────────────────────


def run_optimal_ell(ctx: ExperimentContext) -> ExperimentOutput:
	"""Pointwise optimal ell along x and the resulting speed gain."""
	out = ExperimentOutput()
	t = ctx.target()
	model = DiffusionModel(t, ProposalRule(), ctx.a0_estimator(t))
	ell_grid = ctx.config.ells or list(DEFAULT_ELL_GRID)
	x_grid = ctx.param("x_grid", [0.0, 0.5, 1.0, 1.5, 2.0])
	profile = optimal_ell_profile(model, x_grid, ell_grid)
	rows = out.table("profile", ["x", "ell_star", "speed", "boundary"])
	for x, ell, speed, edge in zip(profile.x_grid, profile.ell_star,
	                               profile.speed, profile.boundary):
		rows.add(float(x), float(ell), float(speed), int(edge))
	out.check(
	    checks.max_abs_below("profile_interior", float(profile.boundary.sum()),
	                         0.0))
	order = np.argsort(np.abs(profile.x_grid))
	out.check(
	    checks.strictly_decreasing("profile_monotone",
	                               profile.ell_star[order]))

	gain = speed_gain(model, profile)
	g = out.table("speed_gain",
	              ["profile_speed", "best_constant_ell", "constant_speed",
	               "gain"])
	g.add(gain.profile_speed, gain.best_constant_ell, gain.constant_speed,
	      gain.gain)
	out.check(checks.report_only("speed_gain", gain.gain))

	# one-dimensional Gaussian u: ell^2 a0 keeps growing
	flat = build_target("gauss_ridge", epsilon=t.epsilon)
	flat_model = DiffusionModel(flat, ProposalRule(), ctx.a0_estimator(flat))
	edge = optimal_ell(flat_model, [0.0], ell_grid)
	out.warn(edge.warnings)
	out.check(
	    checks.report_only("gauss_ridge_boundary", float(edge.at_boundary),
	                       f"ell={edge.ell:g}"))
	out.summary.append({"target": t.name, "n_y": t.n_y,
	                    "ell_star_0": float(profile.ell_star[order[0]])})
	return out


# ── identities ───────────────────────────────────────────────────────


def _identity_rules(base: float) -> list[tuple[str, float | ProposalRule]]:
	ell_fn, grad = tanh_ell(base, 0.5 * base)
	return [("constant", base),
	        ("tanh", ProposalRule(ell=ell_fn, grad_ell=grad))]


def run_identity_checks(ctx: ExperimentContext) -> ExperimentOutput:
	"""Reversibility, averaging, half identities, generator rate, coupling."""
	out = ExperimentOutput()
	F = ctx.accept
	ell = ctx.config.proposal.ell
	phi = gauss_bump(0.0, 3.0)

	rev = out.table("reversibility", ["accept", "max_violation"])
	worst = 0.0
	for G in (METROPOLIS_HASTINGS, BARKER):
		v = check_reversibility(G)
		rev.add(G.name, v)
		worst = max(worst, v)
	out.check(checks.max_abs_below("reversibility", worst,
	                               ctx.tol("reversibility")))

	avg = out.table("averaging", ["target", "rule", "x", "lhs", "rhs", "gap"])
	half = out.table("half_identities",
	                 ["target", "x", "mean_fprime", "half_a0",
	                  "mean_fprime_dxb", "half_dx_a0"])
	avg_worst = 0.0
	half_worst = 0.0
	x_points = ctx.param("x_points", [-1.0, 0.0, 0.5, 2.0])
	for name in ("gauss_ridge", "curved_ridge"):
		t = build_target(name)
		for label, rule in _identity_rules(ell):
			for x in x_points:
				res = averaging_identity_check(t, phi, [x], rule, F,
				                               tolerance=ctx.tol("averaging_gap"))
				avg.add(name, label, float(x), res.lhs, res.rhs, res.gap)
				avg_worst = max(avg_worst, res.gap)
		for x in x_points:
			h = half_identities(t, F, [x], ell)
			half.add(name, float(x), h.mean_fprime, h.half_a0,
			         h.mean_fprime_dxb, h.half_dx_a0)
			half_worst = max(half_worst, *h.gaps)
	out.check(checks.max_abs_below("averaging_gaps", avg_worst,
	                               ctx.tol("averaging_gap")))
	out.check(checks.max_abs_below("half_identities", half_worst,
	                               ctx.tol("averaging_gap")))

	_generator_rate(ctx, out, phi)
	_coupling(ctx, out)
	return out


def _generator_rate(ctx: ExperimentContext, out: ExperimentOutput,
                    phi) -> None:
	"""One-step generator against the limit operator, one fit per point.

	Z_x is integrated by a symmetric Gauss-Hermite rule, so odd powers of
	eps cancel and each point's gap decays like eps^2.
	"""
	t = ctx.target()
	F = ctx.accept
	ell = ctx.config.proposal.ell
	eps_list = sorted(ctx.config.epsilons or [0.1, 0.05, 0.025])
	points = ctx.param("xu_points", [[0.0, 0.0], [0.5, 0.3], [-1.0, 1.0],
	                                 [1.5, -0.5], [0.2, 1.5]])
	rows = out.table("generator", ["x", "u", "epsilon", "one_step", "limit",
	                               "abs_diff"])
	fits = out.table("generator_fits", ["x", "u", "slope", "half_width"])
	slopes = []
	for i, (x, u) in enumerate(points):
		key = ("generator", i)
		pairs = []
		for eps in eps_list:
			prelimit = one_step_generator(t, eps, phi, [x], [u], ell, F,
			                              ctx.counts.mc, ctx.rng(*key))
			limit = limit_operator_A_phi(t,
			                             phi, [x], [u],
			                             ell,
			                             F,
			                             ctx.counts.mc,
			                             ctx.rng(*key),
			                             allow_nonsmooth=True)
			diff = abs(prelimit - limit)
			pairs.append((eps, diff))
			rows.add(float(x), float(u), eps, prelimit, limit, diff)
		try:
			fit = scaling_fit(pairs)
			slope, half = fit.slope, fit.half_width
		except ValueError:
			# a vanishing gap has no log-log slope
			slope, half = float("nan"), float("nan")
		fits.add(float(x), float(u), slope, half)
		slopes.append(slope)
	# the order argument assumes a smooth F
	out.check(
	    checks.all_within_interval("generator_slope",
	                               slopes,
	                               ctx.tol("generator_slope_min"),
	                               ctx.tol("generator_slope_max"),
	                               severity="error" if F.smooth else "warning"))
	out.summary.append({"generator_slopes": slopes})


def _coupling(ctx: ExperimentContext, out: ExperimentOutput) -> None:
	t = ctx.target()
	F = ctx.accept
	ell = ctx.config.proposal.ell
	gamma = float(ctx.param("gamma", 0.25))
	horizon = int(ctx.param("coupling_horizon", 200))
	m = ctx.counts.chains
	eps_list = sorted(ctx.config.epsilons or [0.1, 0.05, 0.025], reverse=True)
	rows = out.table("coupling", ["epsilon", "j", "p_decoupled", "se"])
	hist = out.table("decoupling_histogram", ["epsilon", "index", "count"])
	probs, ses = [], []
	for eps in eps_list:
		j = int(np.floor(eps**-gamma))
		x0, u0 = sample_stationary(t, m, ctx.rng("coupling-init", f"{eps:g}"))
		dec = run_coupled_replicas(t, eps, ell, F, max(horizon, j), x0, u0,
		                           chain_streams(ctx.seed, f"coupling-{eps:g}",
		                                         range(m)))
		p = float(np.mean(dec <= j))
		se = float(np.sqrt(max(p * (1 - p), 1.0 / m) / m))
		probs.append(p)
		ses.append(se)
		rows.add(eps, j, p, se)
		idx, counts = np.unique(dec, return_counts=True)
		for k, n in zip(idx, counts):
			hist.add(eps, int(k), int(n))
	out.check(
	    checks.nonincreasing("coupling_monotone", probs, ses,
	                         ctx.tol("coupling_se")))


__all__ = [
    "run_a0_map",
    "run_compare_diffusion",
    "run_identity_checks",
    "run_limit_diffusion",
    "run_optimal_ell",
]
