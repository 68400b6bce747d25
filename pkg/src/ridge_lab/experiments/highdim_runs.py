"""
The local 0.234 rule for product-form fast coordinates.
"""

from __future__ import annotations

import numpy as np

from ridge_lab.core.accept import METROPOLIS_HASTINGS
from ridge_lab.core.highdim import (ProductMarginal,
                                    empirical_local_acceptance, fisher_term,
                                    limiting_acceptance, local_optimal_step,
                                    optimal_ell_highdim)
from ridge_lab.evals import checks
from ridge_lab.experiments.base import ExperimentContext, ExperimentOutput
from ridge_lab.utils.logging import get_logger

logger = get_logger(__name__)

OPTIMAL_ACCEPTANCE = 0.234


def run_highdim_0234(ctx: ExperimentContext) -> ExperimentOutput:
	"""Closed-form optimum, then empirical local acceptance over n_y."""
	out = ExperimentOutput()
	t = ctx.target()
	F = ctx.accept
	pm = ProductMarginal.from_target(t)

	opt = optimal_ell_highdim(1.0, F)
	scaling = out.table("optimum", ["I2", "ell_star", "ell_star_times_I",
	                                "acceptance"])
	products = []
	for I2 in (0.5, 1.0, 2.0, 4.0):
		o = optimal_ell_highdim(I2, F)
		products.append(o.scaled)
		scaling.add(I2, o.ell, o.scaled, o.acceptance)
	if F is METROPOLIS_HASTINGS:
		out.check(
		    checks.within_tolerance("optimum_0234", opt.acceptance,
		                            OPTIMAL_ACCEPTANCE,
		                            ctx.tol("optimum_0234")))
	else:
		out.check(checks.report_only("optimum_0234", opt.acceptance, F.name))
	out.check(
	    checks.report_only("scaled_optimum_spread",
	                       float(np.ptp(products)), f"c={opt.scaled:.4f}"))

	fisher = out.table("fisher", ["x0", "I2", "warnings"])
	x_points = ctx.param("x_points", [0.0, 1.0])
	for x0 in x_points:
		est = fisher_term(pm, [x0])
		out.warn(est.warnings)
		fisher.add(float(x0), est.value, len(est.warnings))

	x0 = float(ctx.param("x0", 1.0))
	I2 = fisher_term(pm, [x0]).value
	target_acc = limiting_acceptance(I2, optimal_ell_highdim(I2, F).ell, F)
	local = out.table("local", ["x0", "n_y", "ell_scaled", "empirical", "se",
	                            "limit", "gap"])
	gaps, ses = [], []
	at_target = None
	for n_y in ctx.param("n_y_grid", [10, 100, 500, 1000]):
		step = local_optimal_step(pm, [x0], int(n_y), F)
		# same stream for every n_y
		est = empirical_local_acceptance(pm, int(n_y), [x0], step,
		                                 ctx.counts.mc, ctx.rng("highdim-local"),
		                                 F=F)
		gap = abs(est.value - target_acc)
		gaps.append(gap)
		ses.append(est.se)
		local.add(x0, int(n_y), step, est.value, est.se, target_acc, gap)
		if int(n_y) == t.n_y:
			at_target = est
	if at_target is None:
		step = local_optimal_step(pm, [x0], t.n_y, F)
		at_target = empirical_local_acceptance(pm, t.n_y, [x0], step,
		                                       ctx.counts.mc,
		                                       ctx.rng("highdim-local"),
		                                       F=F)
	out.check(
	    checks.within_tolerance("local_0234", at_target.value, target_acc,
	                            ctx.tol("local_0234")))
	out.check(
	    checks.nonincreasing("local_convergence", gaps, ses, 2.0,
	                         severity="warning"))

	# the rule is local: other x0 land on the same acceptance
	worst = 0.0
	for i, xi in enumerate(x_points):
		step = local_optimal_step(pm, [xi], t.n_y, F)
		est = empirical_local_acceptance(pm, t.n_y, [xi], step, ctx.counts.mc,
		                                 ctx.rng("highdim-consistency", i),
		                                 F=F)
		local.add(float(xi), t.n_y, step, est.value, est.se, target_acc,
		          abs(est.value - target_acc))
		worst = max(worst, abs(est.value - target_acc))
	out.check(
	    checks.max_abs_below("local_rule_consistency", worst,
	                         ctx.tol("local_0234")))
	out.summary.append({
	    "scaled_optimum": opt.scaled,
	    "optimal_acceptance": opt.acceptance,
	    "I2_at_x0": I2,
	    "n_y": t.n_y,
	    "local_acceptance": at_target.value,
	    "local_acceptance_se": at_target.se,
	})
	return out


__all__ = ["run_highdim_0234"]
