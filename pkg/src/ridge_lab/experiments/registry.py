"""
Experiment catalog.

Every experiment has a one-line statement of the claim it reproduces,
the acceptance gates it evaluates, a desk-scale default config and the
overrides that restore the full protocol sizes.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from typing import Any


@dataclass(frozen=True)
class ExperimentInfo:
	id: str
	claim: str
	gates: tuple[str, ...]
	defaults: dict[str, Any] = field(default_factory=dict)
	full_scale: dict[str, Any] = field(default_factory=dict)
	conjecture: bool = False

	@property
	def label(self) -> str:
		return f"{self.id} [CONJECTURE]" if self.conjecture else self.id


def _merge(base: dict[str, Any], extra: dict[str, Any]) -> dict[str, Any]:
	out = copy.deepcopy(base)
	for key, value in extra.items():
		if isinstance(value, dict) and isinstance(out.get(key), dict):
			out[key] = _merge(out[key], value)
		else:
			out[key] = copy.deepcopy(value)
	return out


_ENTRIES = [
    ExperimentInfo(
        "sample",
        "RWM on a ridged density targets the right law at every eps",
        ("stationary_mean", "acceptance_rate"),
        {
            "target": {"name": "gauss_ridge", "epsilon": 0.01},
            "proposal": {"ell": 1.0},
            "counts": {"chains": 32, "steps": 20_000, "thinning": 20},
        },
    ),
    ExperimentInfo(
        "a0-map",
        "a0(x, ell) from exact conditionals matches pinned-chain averages",
        ("a0_agreement",),
        {
            "target": {"name": "curved_ridge", "epsilon": 0.01},
            "accept": "metropolis_hastings",
            "counts": {"mc": 20_000, "burn_in": 2_000},
            "ells": [0.5, 1.0, 1.5, 2.0, 2.5, 3.0],
            "params": {"n_points": 20, "x_grid": [-3, -2, -1, 0, 1, 2, 3]},
        },
        {"counts": {"mc": 200_000, "burn_in": 20_000}},
    ),
    ExperimentInfo(
        "limit-diffusion",
        "The slow coordinate follows the limiting SDE with "
        "sigma2 = ell^2 a0",
        ("stationary_variance",),
        {
            "target": {"name": "curved_ridge", "epsilon": 0.01},
            "proposal": {"ell_function": {"kind": "tanh", "base": 1.0,
                                          "amplitude": 0.5}},
            "counts": {"chains": 2_000, "mc": 5_000},
            "params": {"T": 2.0, "times": [0.5, 1.0, 2.0]},
        },
        {"counts": {"chains": 20_000, "mc": 20_000}},
    ),
    ExperimentInfo(
        "limit-jump",
        "Unit-step RWM accelerated by eps^-n_y converges to a jump process",
        ("rate_vs_quadrature", "generator_agreement"),
        {
            "target": {"name": "gauss_ridge", "epsilon": 0.02},
            "accept": "metropolis_hastings",
            "proposal": {"step_mode": "unit", "ell": 1.0},
            "counts": {"mc": 40_000},
            "params": {"points": [[0.0, 0.0], [0.5, -1.0], [-1.0, 1.5]],
                       "T": 5.0},
        },
        {"counts": {"mc": 400_000}},
    ),
    ExperimentInfo(
        "compare-diffusion",
        "Accelerated RWM paths match Euler-Maruyama paths of the limit SDE",
        ("autocorrelation", "ks_t1", "speed_identity"),
        {
            "target": {"name": "gauss_ridge", "epsilon": 0.01},
            "accept": "barker",
            "proposal": {"ell": 1.0},
            "counts": {"chains": 200, "steps": 20_000, "thinning": 100,
                       "mc": 20_000},
        },
    ),
    ExperimentInfo(
        "compare-jump",
        "Acceptance decays as eps^n_y and pre-limit holding times and jumps "
        "match the jump process",
        ("acceptance_slope", "holding_time", "jump_ks"),
        {
            "target": {"name": "gauss_ridge", "epsilon": 0.02},
            "accept": "metropolis_hastings",
            "proposal": {"step_mode": "unit", "ell": 1.0},
            "epsilons": [0.2, 0.1, 0.05],
            "counts": {"chains": 64, "steps": 20_000, "mc": 40_000},
            "params": {"state": [0.0, 0.0], "replicas": 2_000},
        },
        {"params": {"replicas": 20_000}},
    ),
    ExperimentInfo(
        "scaling-study",
        "Complexity grows as eps^-2 for h = eps and as eps^-n_y for unit "
        "steps",
        ("slope_unit", "slope_epsilon_scaled"),
        {
            "target": {"name": "product_ridge", "epsilon": 0.1, "n_y": 1},
            "accept": "metropolis_hastings",
            "proposal": {"ell": 1.0},
            "epsilons": [0.2, 0.1, 0.05],
            "counts": {"chains": 32, "steps": 20_000},
            "params": {"max_recorded": 20_000},
        },
        {"counts": {"chains": 128, "steps": 50_000}},
    ),
    ExperimentInfo(
        "optimal-ell",
        "The ESJD-optimal ell(x) maximizes ell^2 a0 pointwise",
        ("profile_interior", "profile_monotone"),
        {
            "target": {"name": "product_ridge", "epsilon": 0.01, "n_y": 3},
            "accept": "metropolis_hastings",
            "counts": {"mc": 20_000},
            "params": {"x_grid": [0.0, 0.5, 1.0, 1.5, 2.0]},
        },
    ),
    ExperimentInfo(
        "highdim-0234",
        "With many product-form fast coordinates the local optimal "
        "acceptance is 0.234",
        ("optimum_0234", "local_0234", "local_rule_consistency"),
        {
            "target": {"name": "product_ridge", "epsilon": 0.01, "n_y": 500},
            "accept": "metropolis_hastings",
            "counts": {"mc": 20_000},
            "params": {"x0": 1.0, "n_y_grid": [10, 100, 500, 1000],
                       "x_points": [0.0, 1.0]},
        },
        {"counts": {"mc": 100_000}},
    ),
    ExperimentInfo(
        "manifold-geom",
        "Frames on a chart satisfy K J^T = 0 and Dr^T Dr = G; projection "
        "round-trips",
        ("kj_orthogonality", "metric_identity", "round_trip"),
        {
            "params": {"charts": ["parabola", "circle"], "n_points": 100,
                       "tube": 0.05},
        },
    ),
    ExperimentInfo(
        "manifold-circle",
        "On the circle a tangential step sqrt(eps) keeps acceptance bounded "
        "while eps^(1/4) does not",
        ("sqrt_containment", "quarter_decreasing", "parabola_acceptance"),
        {
            "accept": "metropolis_hastings",
            "proposal": {"ell": 1.0},
            "epsilons": [1e-2, 1e-3, 1e-4],
            "counts": {"chains": 4, "steps": 2_000},
            "params": {"sde_paths": 2_000, "sde_chains": 16},
        },
        {"counts": {"chains": 16, "steps": 10_000}},
        conjecture=True,
    ),
    ExperimentInfo(
        "identity-checks",
        "Generator, averaging, half and coupling identities behind the "
        "diffusion limit",
        ("reversibility", "averaging_gaps", "half_identities",
         "generator_slope", "coupling_monotone"),
        {
            "target": {"name": "curved_ridge", "epsilon": 0.01},
            "accept": "barker",
            "proposal": {"ell": 1.0},
            "epsilons": [0.1, 0.05, 0.025],
            "counts": {"mc": 20_000, "chains": 500},
            "params": {"x_points": [-1.0, 0.0, 0.5, 2.0],
                       "xu_points": [[0.0, 0.0], [0.5, 0.3], [-1.0, 1.0],
                                     [1.5, -0.5], [0.2, 1.5]],
                       "gamma": 0.25},
        },
        {"counts": {"mc": 200_000, "chains": 2_000}},
    ),
]

CATALOG: dict[str, ExperimentInfo] = {e.id: e for e in _ENTRIES}
EXPERIMENT_IDS: tuple[str, ...] = tuple(CATALOG)


def get_experiment(experiment_id: str) -> ExperimentInfo:
	try:
		return CATALOG[experiment_id]
	except KeyError:
		raise ValueError(f"unknown experiment {experiment_id!r}; expected "
		                 f"one of {', '.join(EXPERIMENT_IDS)}") from None


def default_config(experiment_id: str,
                   full_scale: bool = False) -> dict[str, Any]:
	"""Unvalidated default config mapping for ``experiment_id``."""
	info = get_experiment(experiment_id)
	data = _merge({"experiment": experiment_id}, info.defaults)
	if full_scale:
		data = _merge(data, info.full_scale)
	return data


def merge_config(base: dict[str, Any], extra: dict[str, Any]) -> dict[str, Any]:
	"""Deep merge of two config mappings; ``extra`` wins."""
	return _merge(base, extra)


__all__ = [
    "CATALOG",
    "EXPERIMENT_IDS",
    "ExperimentInfo",
    "default_config",
    "get_experiment",
    "merge_config",
]
