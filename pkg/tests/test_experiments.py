import pytest

from ridge_lab.core.manifold import CONJECTURE
from ridge_lab.core.rwm import StepMode
from ridge_lab.experiments.base import (ExperimentContext, ExperimentOutput,
                                        Table, stationary_average)
from ridge_lab.experiments.registry import (CATALOG, default_config,
                                            merge_config)
from ridge_lab.experiments.runner import DRIVERS
from ridge_lab.loaders.config_file import validate_config


def _ctx(experiment, **overrides):
	data = {"experiment": experiment}
	data.update(overrides)
	return ExperimentContext(validate_config(data), parallelism=2, block=2)


def _desk(experiment, **overrides):
	"""Context from the catalog defaults with ``overrides`` merged on top."""
	data = merge_config(default_config(experiment), overrides)
	return ExperimentContext(validate_config(data), parallelism=2, block=2)


def test_table_rejects_wrong_width():
	t = Table("t", ("a", "b"))
	t.add(1, 2)
	with pytest.raises(ValueError):
		t.add(1)


def test_output_collects():
	out = ExperimentOutput()
	out.table("x", ["a"]).add(1)
	out.warn(["one", "two"])
	assert out.tables[0].rows == [(1,)]
	assert out.warnings == ["one", "two"]


def test_context_rule_and_target():
	ctx = _ctx("sample",
	           target={"name": "product_ridge", "epsilon": 0.1, "n_y": 2},
	           proposal={"step_mode": "custom_exponent", "kappa": 0.5},
	           tolerances={"round_trip": 1e-3})
	t = ctx.target()
	assert t.n_y == 2
	assert ctx.target(epsilon=0.2).epsilon == 0.2
	rule = ctx.rule(t)
	assert rule.step_mode is StepMode.CUSTOM_EXPONENT
	assert ctx.tol("round_trip") == 1e-3
	assert ctx.tol("metric_identity") == 1e-12


def test_context_tanh_rule():
	ctx = _ctx("sample",
	           proposal={"ell_function": {"kind": "tanh", "base": 1.0,
	                                      "amplitude": 0.5}})
	rule = ctx.rule(ctx.target())
	assert rule.position_dependent


def test_stationary_average_moments():
	t = _ctx("sample").target()
	assert stationary_average(t, lambda x: x * x) == pytest.approx(1.0)
	assert stationary_average(t, lambda x: x) == pytest.approx(0.0, abs=1e-12)


def _gate_names(out):
	return {c.name for c in out.checks}


def test_sample_driver_small():
	ctx = _ctx("sample",
	           counts={"chains": 4, "steps": 200, "thinning": 10, "mc": 500,
	                   "burn_in": 50})
	out = DRIVERS["sample"](ctx)
	assert _gate_names(out) == set(CATALOG["sample"].gates)
	names = [t.name for t in out.tables]
	assert names == ["states", "chains"]
	# the initial state plus 20 thinned states per chain
	assert len(out.tables[0].rows) == 4 * 21
	assert out.summary[0]["target"] == "gauss_ridge"


def test_a0_map_driver_small():
	ctx = _ctx("a0-map",
	           target={"name": "curved_ridge", "epsilon": 0.01},
	           accept="metropolis_hastings",
	           ells=[1.0, 2.0],
	           counts={"mc": 500, "burn_in": 50},
	           params={"n_points": 2, "x_grid": [0.0, 1.0]})
	out = DRIVERS["a0-map"](ctx)
	assert _gate_names(out) == {"a0_agreement"}
	lattice = next(t for t in out.tables if t.name == "a0_lattice")
	assert len(lattice.rows) == 4
	assert all(0.0 <= row[2] <= 1.0 for row in lattice.rows)


def _table(out, name):
	return next(t for t in out.tables if t.name == name)


def _has_catalog_gates(out, experiment):
	return set(CATALOG[experiment].gates) <= _gate_names(out)


# ── diffusion drivers ────────────────────────────────────────────────


def test_limit_diffusion_driver_small():
	ctx = _desk("limit-diffusion",
	            counts={"chains": 200, "mc": 500},
	            params={"T": 0.2, "times": [0.1, 0.2]})
	out = DRIVERS["limit-diffusion"](ctx)
	assert _gate_names(out) == {"stationary_variance", "stationary_mean"}
	assert _has_catalog_gates(out, "limit-diffusion")
	assert len(_table(out, "volatility").rows) == 121
	marginals = _table(out, "marginals")
	assert [row[0] for row in marginals.rows] == [0.0, 0.1, 0.2]
	assert out.summary[0]["paths"] == 200


def test_compare_diffusion_driver_small():
	ctx = _desk("compare-diffusion",
	            target={"epsilon": 0.1},
	            counts={"chains": 8, "steps": 400, "thinning": 10, "mc": 500})
	out = DRIVERS["compare-diffusion"](ctx)
	assert _gate_names(out) == set(CATALOG["compare-diffusion"].gates)
	# one unit of diffusion time is 100 steps, recorded every 10
	assert out.summary[0]["lag_recorded"] == 10
	assert [row[0] for row in _table(out, "comparison").rows] == [
	    "autocorrelation_t1", "ks_statistic_t1", "esjd_over_eps2"
	]
	assert len(_table(out, "t1_quantiles").rows) == 5


def test_compare_diffusion_rejects_short_runs():
	ctx = _desk("compare-diffusion",
	            target={"epsilon": 0.1},
	            counts={"chains": 2, "steps": 50, "thinning": 10, "mc": 200})
	with pytest.raises(ValueError):
		DRIVERS["compare-diffusion"](ctx)


def test_optimal_ell_driver_small():
	ctx = _desk("optimal-ell",
	            ells=[0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0],
	            counts={"mc": 2000},
	            params={"x_grid": [0.0, 1.0, 2.0]})
	out = DRIVERS["optimal-ell"](ctx)
	assert _has_catalog_gates(out, "optimal-ell")
	assert len(_table(out, "profile").rows) == 3
	edge = next(c for c in out.checks if c.name == "gauss_ridge_boundary")
	# ell^2 a0 keeps growing for one Gaussian fast coordinate
	assert edge.value == 1.0
	assert edge.severity == "info"
	assert out.summary[0]["n_y"] == 3


def test_identity_checks_driver_small():
	ctx = _desk("identity-checks",
	            counts={"mc": 500, "chains": 50},
	            params={"x_points": [0.0, 0.5],
	                    "xu_points": [[0.0, 0.0], [0.5, 0.3], [-1.0, 1.0]],
	                    "coupling_horizon": 50})
	out = DRIVERS["identity-checks"](ctx)
	assert _gate_names(out) == set(CATALOG["identity-checks"].gates)
	reversibility = next(c for c in out.checks if c.name == "reversibility")
	assert reversibility.passed
	# three eps per point, one slope per point
	assert len(_table(out, "generator").rows) == 9
	fits = _table(out, "generator_fits")
	assert [(row[0], row[1]) for row in fits.rows] == [(0.0, 0.0), (0.5, 0.3),
	                                                   (-1.0, 1.0)]
	slope = next(c for c in out.checks if c.name == "generator_slope")
	assert slope.expected == "all 3 in [1.5, 2.5]"
	assert len(out.summary[0]["generator_slopes"]) == 3
	assert len(_table(out, "coupling").rows) == 3


# ── jump drivers ─────────────────────────────────────────────────────


def test_limit_jump_driver_small():
	ctx = _desk("limit-jump",
	            counts={"mc": 4000},
	            params={"points": [[0.0, 0.0], [0.5, -1.0]], "T": 1.0})
	out = DRIVERS["limit-jump"](ctx)
	assert _gate_names(out) == set(CATALOG["limit-jump"].gates)
	assert len(_table(out, "rates").rows) == 2
	assert len(_table(out, "generator").rows) == 2
	sources = {row[0] for row in _table(out, "paths").rows}
	assert sources == {"limit", "prelimit"}
	# T / eps^n_y unit steps
	assert out.summary[0]["prelimit_steps"] == 50


def test_compare_jump_driver_small():
	ctx = _desk("compare-jump",
	            counts={"mc": 4000},
	            params={"state": [0.0, 0.0], "replicas": 50})
	out = DRIVERS["compare-jump"](ctx)
	assert _has_catalog_gates(out, "compare-jump")
	quadrature = next(c for c in out.checks if c.name == "jump_ks_quadrature")
	assert quadrature.severity == "info"
	assert [row[0] for row in _table(out, "acceptance").rows] == [
	    0.05, 0.1, 0.2
	]
	assert out.summary[0]["replicas"] == 50


def test_scaling_study_driver_small():
	ctx = _desk("scaling-study",
	            epsilons=[0.4, 0.2, 0.1],
	            counts={"chains": 4, "steps": 200})
	out = DRIVERS["scaling-study"](ctx)
	assert _has_catalog_gates(out, "scaling-study")
	assert len(_table(out, "iact").rows) == 6
	assert {row[0] for row in _table(out, "fits").rows} == {
	    "unit", "epsilon_scaled"
	}
	assert out.summary[0]["n_y"] == 1


# ── high-dimensional and manifold drivers ────────────────────────────


def test_highdim_driver_small():
	ctx = _desk("highdim-0234",
	            target={"n_y": 50},
	            counts={"mc": 2000},
	            params={"n_y_grid": [10, 50], "x_points": [0.0, 1.0]})
	out = DRIVERS["highdim-0234"](ctx)
	assert _has_catalog_gates(out, "highdim-0234")
	optimum = next(c for c in out.checks if c.name == "optimum_0234")
	# closed form, independent of the Monte Carlo size
	assert optimum.passed
	assert len(_table(out, "optimum").rows) == 4
	# the n_y sweep, then one row per consistency point
	assert len(_table(out, "local").rows) == 4
	assert out.summary[0]["n_y"] == 50


def test_manifold_circle_driver_small():
	ctx = _desk("manifold-circle",
	            counts={"chains": 2, "steps": 100, "mc": 300},
	            params={"parabola_epsilon": 0.1, "sde_chains": 3,
	                    "sde_paths": 50})
	out = DRIVERS["manifold-circle"](ctx)
	assert out.tags == [CONJECTURE]
	assert _has_catalog_gates(out, "manifold-circle")
	conjecture = next(c for c in out.checks if c.name == "conjecture_ks_t1")
	assert conjecture.severity == "info"
	acceptance = _table(out, "acceptance")
	# three eps times two exponents on the circle, then the parabola
	assert len(acceptance.rows) == 7
	assert acceptance.rows[-1][0] == "parabola"
	assert len(_table(out, "conjecture_sigma2").rows) == 18
