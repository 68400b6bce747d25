"""
Manifold experiments: frame geometry and the circle step-size study.

Everything downstream of the conjectured SDE is tagged CONJECTURE and
only reported.
"""

from __future__ import annotations

import numpy as np

from ridge_lab.core.diagnostics import ks_distance
from ridge_lab.core.manifold import (CONJECTURE, ManifoldChart, StepSpec,
                                     ambient_point, build_chart,
                                     conjecture_sde_simulate,
                                     conjecture_sigma2, frame,
                                     frame_identities, manifold_a0_model,
                                     manifold_rwm_run, metric_tensor,
                                     tangent_normal_coords)
from ridge_lab.evals import checks
from ridge_lab.experiments.base import ExperimentContext, ExperimentOutput
from ridge_lab.utils.logging import get_logger

logger = get_logger(__name__)

LOG_2PI = float(np.log(2.0 * np.pi))
FRAME_STEP = 1e-6

# chart coordinates sampled for geometry checks
_COORD_RANGE = {"parabola": (-2.0, 2.0), "circle": (-3.0, 3.0)}


def gaussian_B(x: np.ndarray, u: np.ndarray) -> np.ndarray:
	"""Standard Gaussian fast coordinate, independent of x."""
	u = np.asarray(u, dtype=float)
	return -0.5 * np.sum(u**2, axis=-1) - 0.5 * u.shape[-1] * LOG_2PI


def gaussian_u(x: np.ndarray, count: int,
               rng: np.random.Generator) -> np.ndarray:
	return rng.standard_normal((count, 1))


def _slow_log_density(chart: ManifoldChart):
	"""A(x) along a chart: cos theta on the circle, -x^2/2 elsewhere."""
	if chart.name == "circle":
		return (lambda x: float(np.cos(np.ravel(x)[0])),
		        lambda x: -np.sin(np.asarray(x, dtype=float)))
	return (lambda x: float(-0.5 * np.ravel(x)[0]**2),
	        lambda x: -np.asarray(x, dtype=float))


# ── geometry ─────────────────────────────────────────────────────────


def run_manifold_geom(ctx: ExperimentContext) -> ExperimentOutput:
	"""Frame identities, projection round trips and frame smoothness."""
	out = ExperimentOutput()
	n_points = int(ctx.param("n_points", 100))
	tube = float(ctx.param("tube", 0.05))
	frames = out.table("frames", ["chart", "x", "G", "normal_0", "normal_1",
	                              "kj", "metric_gap"])
	trips = out.table("round_trips", ["chart", "x", "y", "x_back", "y_back",
	                                  "error"])
	worst_kj = worst_metric = worst_trip = worst_smooth = 0.0
	for name in ctx.param("charts", ["parabola", "circle"]):
		chart = build_chart(name)
		low, high = _COORD_RANGE.get(name, (-1.0, 1.0))
		rng = ctx.rng("manifold-geom", name)
		xs = rng.uniform(low, high, n_points)
		ys = rng.uniform(-tube, tube, n_points)
		for x, y in zip(xs, ys):
			kj, gap = frame_identities(chart, [x])
			fr = frame(chart, [x])
			frames.add(name, float(x), float(fr.G[0, 0]),
			           float(fr.Q_basis[0, 0]), float(fr.Q_basis[1, 0]), kj,
			           gap)
			worst_kj = max(worst_kj, kj)
			worst_metric = max(worst_metric, gap)

			w = ambient_point(chart, [x], [y])
			x_back, y_back = tangent_normal_coords(chart, w)
			err = float(np.max(np.abs(ambient_point(chart, x_back, y_back) -
			                          w)))
			err = max(err, abs(float(x_back[0]) - x),
			          abs(float(y_back[0]) - y))
			trips.add(name, float(x), float(y), float(x_back[0]),
			          float(y_back[0]), err)
			worst_trip = max(worst_trip, err)

		for x in np.linspace(low, high, 201):
			q0 = frame(chart, [x]).Q_basis
			q1 = frame(chart, [x + FRAME_STEP]).Q_basis
			worst_smooth = max(worst_smooth, float(np.linalg.norm(q1 - q0)))

	out.check(checks.max_abs_below("kj_orthogonality", worst_kj,
	                               ctx.tol("kj_orthogonality")))
	out.check(checks.max_abs_below("metric_identity", worst_metric,
	                               ctx.tol("metric_identity")))
	out.check(checks.max_abs_below("round_trip", worst_trip,
	                               ctx.tol("round_trip")))
	out.check(checks.max_abs_below("frame_smoothness", worst_smooth,
	                               ctx.tol("frame_smoothness")))
	out.summary.append({
	    "points_per_chart": n_points,
	    "tube": tube,
	    "max_kj": worst_kj,
	    "max_metric_gap": worst_metric,
	    "max_round_trip": worst_trip,
	})
	return out


# ── circle study ─────────────────────────────────────────────────────


def _mean_acceptance(ctx: ExperimentContext, chart: ManifoldChart, eps: float,
                     spec: StepSpec, tag: str) -> tuple[float, float]:
	A, _ = _slow_log_density(chart)
	ell = ctx.config.proposal.ell
	c = ctx.counts
	probs = []
	for i in range(c.chains):
		rng = ctx.rng(tag, f"{eps:g}", i)
		x0 = rng.uniform(-1.0, 1.0)
		u0 = rng.standard_normal()
		run = manifold_rwm_run(chart, A, gaussian_B, eps, ell, ctx.accept, spec,
		                       c.steps, rng, x0=[x0], u0=[u0])
		probs.append(run.mean_accept_prob)
	probs = np.asarray(probs)
	se = float(probs.std(ddof=1) / np.sqrt(probs.size)) if probs.size > 1 \
	    else 0.0
	return float(probs.mean()), se


def run_manifold_circle(ctx: ExperimentContext) -> ExperimentOutput:
	"""Acceptance under sqrt(eps) and eps^(1/4) tangential steps."""
	out = ExperimentOutput(tags=[CONJECTURE])
	circle = build_chart("circle")
	eps_list = sorted(ctx.config.epsilons or [1e-2, 1e-3, 1e-4], reverse=True)
	table = out.table("acceptance", ["chart", "epsilon", "tangent_exponent",
	                                 "mean_accept", "se"])
	sqrt_acc, quarter_acc, quarter_se = [], [], []
	for eps in eps_list:
		for exponent in (0.5, 0.25):
			mean, se = _mean_acceptance(ctx, circle, eps,
			                            StepSpec.anisotropic(exponent),
			                            f"circle-{exponent:g}")
			table.add("circle", eps, exponent, mean, se)
			if exponent == 0.5:
				sqrt_acc.append(mean)
			else:
				quarter_acc.append(mean)
				quarter_se.append(se)
	out.check(
	    checks.within_interval("sqrt_containment", min(sqrt_acc), 0.1, 0.9))
	out.check(
	    checks.within_interval("sqrt_containment_max", max(sqrt_acc), 0.1,
	                           0.9))
	out.check(checks.strictly_decreasing("quarter_decreasing", quarter_acc))

	parabola = build_chart("parabola")
	eps_p = float(ctx.param("parabola_epsilon", 0.01))
	mean, se = _mean_acceptance(ctx, parabola, eps_p, StepSpec.isotropic(),
	                            "parabola")
	table.add("parabola", eps_p, 1.0, mean, se)
	out.check(
	    checks.within_interval("parabola_acceptance", mean, np.nextafter(0, 1),
	                           np.nextafter(1, 0)))

	_conjecture_comparison(ctx, out, parabola, eps_p)
	_conjecture_volatility(ctx, out)
	out.summary.append({
	    "label": CONJECTURE,
	    "sqrt_acceptance": sqrt_acc,
	    "quarter_acceptance": quarter_acc,
	    "parabola_acceptance": mean,
	})
	return out


def _conjecture_volatility(ctx: ExperimentContext,
                           out: ExperimentOutput) -> None:
	"""Conjectured sigma2 along both charts, next to G."""
	ell = ctx.config.proposal.ell
	rows = out.table("conjecture_sigma2", ["chart", "x", "G", "sigma2"])
	for name in ("circle", "parabola"):
		chart = build_chart(name)
		a0 = manifold_a0_model(chart, gaussian_B, gaussian_u, ctx.accept,
		                       ctx.counts.mc, ctx.seed)
		for x in np.linspace(-2.0, 2.0, 9):
			rows.add(name, float(x), float(metric_tensor(chart, [x])[0, 0]),
			         conjecture_sigma2(chart, a0, float(x), ell))


def _conjecture_comparison(ctx: ExperimentContext, out: ExperimentOutput,
                           chart: ManifoldChart, eps: float) -> None:
	"""KS at diffusion time 1 between isotropic chains and the SDE."""
	A, grad_A = _slow_log_density(chart)
	ell = ctx.config.proposal.ell
	x0 = float(ctx.param("sde_x0", 0.0))
	n_chains = int(ctx.param("sde_chains", 16))
	n_paths = int(ctx.param("sde_paths", 2_000))
	steps = int(round(eps**-2))
	finals = []
	for i in range(n_chains):
		rng = ctx.rng("conjecture-chain", i)
		run = manifold_rwm_run(chart, A, gaussian_B, eps, ell, ctx.accept,
		                       StepSpec.isotropic(), steps, rng, x0=[x0],
		                       u0=[rng.standard_normal()])
		finals.append(float(run.x[-1, 0]))
	a0 = manifold_a0_model(chart, gaussian_B, gaussian_u, ctx.accept,
	                       ctx.counts.mc, ctx.seed)
	paths = conjecture_sde_simulate(chart,
	                                A,
	                                a0,
	                                ell,
	                                1.0,
	                                None,
	                                n_paths,
	                                ctx.rng("conjecture-sde"),
	                                init=[x0],
	                                x_grid=np.linspace(-5.0, 5.0, 101),
	                                grad_A=grad_A,
	                                record_every=100)
	ks = ks_distance(np.asarray(finals), paths.x[:, -1, 0])
	out.check(
	    checks.report_only("conjecture_ks_t1", ks.statistic,
	                       f"{CONJECTURE}: p={ks.pvalue:.3g}, "
	                       f"{n_chains} chains vs {n_paths} paths"))
	rows = out.table("conjecture_t1", ["source", "mean", "var"])
	rows.add("rwm", float(np.mean(finals)), float(np.var(finals)))
	rows.add("sde", float(paths.x[:, -1, 0].mean()),
	         float(paths.x[:, -1, 0].var()))


__all__ = [
    "gaussian_B",
    "gaussian_u",
    "run_manifold_circle",
    "run_manifold_geom",
]
