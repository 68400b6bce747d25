"""
Jump-regime experiments (unit steps, time sped up by eps^-n_y).
"""

from __future__ import annotations

import numpy as np
from scipy import stats

from ridge_lab.core.bumps import gauss_bump
from ridge_lab.core.diagnostics import (ScalingRow, ScalingTable, ks_distance,
                                        mean_se)
from ridge_lab.core.jump import (JumpModel, accelerated_prelimit,
                                 first_prelimit_jump, jump_generator,
                                 jump_rate, jump_rate_quadrature,
                                 kernel_x_marginal_quadrature,
                                 prelimit_jump_generator, rate_bound,
                                 sample_next_jump,
                                 simulate_jump_process)
from ridge_lab.core.targets import MultiscaleTarget, sample_stationary
from ridge_lab.evals import checks
from ridge_lab.experiments.base import ExperimentContext, ExperimentOutput
from ridge_lab.utils.logging import get_logger

logger = get_logger(__name__)


def _jump_model(ctx: ExperimentContext, t: MultiscaleTarget) -> JumpModel:
	return JumpModel(t, ctx.config.proposal.ell, ctx.accept,
	                 rate_mc=ctx.counts.mc)


def _phi_xu():
	in_x = gauss_bump(0.0, 3.0)
	in_u = gauss_bump(0.0, 4.0)
	return lambda x, u: in_x(x) * in_u(u)


def run_limit_jump(ctx: ExperimentContext) -> ExperimentOutput:
	"""Rates, generator and a sample path of the limit jump process."""
	out = ExperimentOutput()
	t = ctx.target()
	jm = _jump_model(ctx, t)
	eps = t.epsilon
	points = ctx.param("points", [[0.0, 0.0]])
	phi = _phi_xu()

	rates = out.table("rates", ["x", "u", "rate_mc", "se", "rate_quadrature",
	                            "rate_bound"])
	gens = out.table("generator", ["x", "u", "limit", "limit_se", "prelimit",
	                               "prelimit_se", "gap_se"])
	rate_gaps, gen_gaps = [], []
	quadrature = t.n_x == 1 and t.n_y == 1
	for i, (x, u) in enumerate(points):
		est = jump_rate(jm, [x], [u], ctx.rng("jump-rate", i))
		out.warn(est.warnings)
		ref = jump_rate_quadrature(jm, [x], [u]) if quadrature else np.nan
		rates.add(float(x), float(u), est.value, est.se, ref,
		          rate_bound(jm, [x], [u]))
		if quadrature:
			rate_gaps.append(abs(est.value - ref) / est.se)

		lim = jump_generator(jm, phi, [x], [u], ctx.counts.mc,
		                     ctx.rng("jump-generator", i))
		pre = prelimit_jump_generator(t, eps, jm.ell, ctx.accept, phi, [x],
		                              [u], ctx.counts.mc,
		                              ctx.rng("prelimit-generator", i))
		gap = abs(lim.value - pre.value) / max(np.hypot(lim.se, pre.se),
		                                       1e-300)
		gen_gaps.append(gap)
		gens.add(float(x), float(u), lim.value, lim.se, pre.value, pre.se, gap)

	if quadrature:
		out.check(
		    checks.agreement_count("rate_vs_quadrature", rate_gaps,
		                           ctx.tol("jump_rate_se"), 0))
	else:
		out.warn([f"no rate quadrature for n_x={t.n_x}, n_y={t.n_y}"])
	out.check(
	    checks.agreement_count("generator_agreement", gen_gaps,
	                           ctx.tol("generator_agreement_se"), 0))

	T = float(ctx.param("T", 5.0))
	x0, u0 = points[0]
	limit_path = simulate_jump_process(jm, T, ([x0], [u0]),
	                                   ctx.rng("jump-path"))
	prelimit_path = accelerated_prelimit(t, eps, jm.ell, ctx.accept, T,
	                                     ([x0], [u0]), ctx.rng("prelimit-path"))
	paths = out.table("paths", ["source", "time", "x", "u"])
	for source, path in (("limit", limit_path), ("prelimit", prelimit_path)):
		for time, xs, us in zip(path.times, path.x, path.u):
			paths.add(source, float(time), float(xs[0]), float(us[0]))
	out.summary.append({
	    "T": T,
	    "limit_events": limit_path.n_events,
	    "prelimit_events": prelimit_path.n_events,
	    "prelimit_steps": prelimit_path.n_steps,
	})
	return out


def _unit_acceptance(t: MultiscaleTarget, ell: float, F, count: int,
                     rng: np.random.Generator):
	"""Mean acceptance of one unit step from stationarity."""
	x, u = sample_stationary(t, count, rng)
	z = rng.standard_normal((count, t.n_x + t.n_y))
	xp = x + ell * z[:, :t.n_x]
	up = u + ell / t.epsilon * z[:, t.n_x:]
	r = t.A(xp) + t.B(xp, up) - t.A(x) - t.B(x, u)
	return mean_se(F.evaluate_fn(r))


def run_compare_jump(ctx: ExperimentContext) -> ExperimentOutput:
	"""Unit-step chains at small eps against the limit jump process."""
	out = ExperimentOutput()
	F = ctx.accept
	ell = ctx.config.proposal.ell
	base = ctx.target()

	acc_rows = out.table("acceptance", ["epsilon", "mean_accept", "se"])
	scaling = ScalingTable()
	for eps in sorted(ctx.config.epsilons or [0.2, 0.1, 0.05]):
		est = _unit_acceptance(base.with_epsilon(eps), ell, F, ctx.counts.mc,
		                       ctx.rng("unit-acceptance", f"{eps:g}"))
		acc_rows.add(eps, est.value, est.se)
		scaling.add(ScalingRow(eps, "unit", est.value, est.se))
	fit = scaling.fit("unit")
	out.check(
	    checks.within_tolerance("acceptance_slope", fit.slope, float(base.n_y),
	                            ctx.tol("jump_rate_slope")))

	t = base
	eps = t.epsilon
	jm = _jump_model(ctx, t)
	x, u = ctx.param("state", [0.0, 0.0])
	rate = jump_rate(jm, [x], [u], ctx.rng("compare-rate"))
	out.warn(rate.warnings)
	scale = eps**t.n_y
	replicas = int(ctx.param("replicas", 2_000))
	max_steps = int(np.ceil(50.0 / (rate.value * scale)))
	rng = ctx.rng("holding-times")
	holds, dest = [], []
	censored = 0
	for _ in range(replicas):
		jump = first_prelimit_jump(t, eps, ell, F, [x], [u], rng, max_steps)
		if jump is None:
			censored += 1
			continue
		holds.append(jump.steps * scale)
		dest.append(float(jump.x[0]))
	if censored:
		out.warn([f"{censored} of {replicas} replicas saw no jump within "
		          f"{max_steps} steps"])
	hold = mean_se(holds)
	rel = abs(hold.value * rate.value - 1.0)
	out.check(
	    checks.max_abs_below("holding_time", rel, ctx.tol("holding_time_rel")))

	limit_rng = ctx.rng("limit-jumps")
	limit_dest = np.array([
	    sample_next_jump(jm, [x], [u], limit_rng, rate=rate.value).x[0]
	    for _ in range(replicas)
	])
	ks = ks_distance(np.asarray(dest), limit_dest)
	out.check(
	    checks.ks_not_rejected("jump_ks", ks.pvalue, ctx.tol("jump_ks_level")))
	if t.n_x == 1 and t.n_y == 1:
		marginal = kernel_x_marginal_quadrature(jm, [x], [u])
		ref = stats.kstest(dest, marginal.cdf)
		out.check(
		    checks.report_only("jump_ks_quadrature", float(ref.pvalue),
		                       f"D={ref.statistic:.4f}"))

	holding = out.table("holding", ["quantity", "prelimit", "limit", "se"])
	holding.add("mean_holding_time", hold.value, 1.0 / rate.value, hold.se)
	holding.add("ks_statistic_x", ks.statistic, 0.0, float("nan"))
	quant = out.table("destination_quantiles", ["q", "prelimit", "limit"])
	for q in (0.05, 0.25, 0.5, 0.75, 0.95):
		quant.add(q, float(np.quantile(dest, q)),
		          float(np.quantile(limit_dest, q)))
	out.summary.append({
	    "n_y": t.n_y,
	    "acceptance_slope": fit.slope,
	    "rate": rate.value,
	    "rate_se": rate.se,
	    "replicas": replicas,
	    "censored": censored,
	})
	return out


__all__ = ["run_compare_jump", "run_limit_jump"]
