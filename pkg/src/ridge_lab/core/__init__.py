"""Numerical core of the lab.

Key modules:
    - targets: ridged two-scale densities and their registry
    - accept: acceptance functions and the reversibility check
    - rwm: RWM chains, pinned chains and coupled chains
    - diffusion: a0 estimation, the limiting SDE and generator identities
    - jump: the jump-process limit for O(1) steps
    - highdim: product-form fast coordinates and the local 0.234 rule
    - manifold: charts, frames, projection and the conjectured SDE
    - diagnostics: ESJD, IACT, KS distance and scaling fits
"""

from ridge_lab.core.accept import (
    BARKER,
    METROPOLIS_HASTINGS,
    AcceptFunction,
    check_reversibility,
    get_accept,
    register_accept,
)
from ridge_lab.core.targets import (
    MultiscaleTarget,
    build_target,
    builtin_target_ids,
    register_target,
)
from ridge_lab.core.rwm import (
    ChainState,
    ProposalRule,
    StepMode,
    run_chain,
    run_coupled_chains,
    run_pinned_chain,
    step,
)
from ridge_lab.core.diffusion import (
    A0Estimator,
    DiffusionModel,
    limit_operator_A_phi,
    simulate_diffusion,
)
from ridge_lab.core.jump import JumpModel, jump_rate, sample_next_jump
from ridge_lab.core.highdim import (
    fisher_term,
    limiting_acceptance,
    optimal_ell_highdim,
)
from ridge_lab.core.manifold import build_chart, frame, project
from ridge_lab.core.diagnostics import esjd, iact, ks_distance, scaling_fit

__all__ = [
    # accept
    "AcceptFunction",
    "BARKER",
    "METROPOLIS_HASTINGS",
    "check_reversibility",
    "get_accept",
    "register_accept",
    # targets
    "MultiscaleTarget",
    "build_target",
    "builtin_target_ids",
    "register_target",
    # rwm
    "ChainState",
    "ProposalRule",
    "StepMode",
    "run_chain",
    "run_coupled_chains",
    "run_pinned_chain",
    "step",
    # diffusion
    "A0Estimator",
    "DiffusionModel",
    "limit_operator_A_phi",
    "simulate_diffusion",
    # jump
    "JumpModel",
    "jump_rate",
    "sample_next_jump",
    # highdim
    "fisher_term",
    "limiting_acceptance",
    "optimal_ell_highdim",
    # manifold
    "build_chart",
    "frame",
    "project",
    # diagnostics
    "esjd",
    "iact",
    "ks_distance",
    "scaling_fit",
]
