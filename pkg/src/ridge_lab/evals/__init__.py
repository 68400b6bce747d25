"""
Acceptance checks.

Pure functions turning measured quantities into pass/fail records.
"""

from ridge_lab.evals.checks import (
    DEFAULT_TOLERANCES,
    agreement_count,
    collect_checks,
    ks_not_rejected,
    max_abs_below,
    nonincreasing,
    report_only,
    strictly_decreasing,
    within_interval,
    within_se,
    within_tolerance,
)

__all__ = [
    "DEFAULT_TOLERANCES",
    "agreement_count",
    "collect_checks",
    "ks_not_rejected",
    "max_abs_below",
    "nonincreasing",
    "report_only",
    "strictly_decreasing",
    "within_interval",
    "within_se",
    "within_tolerance",
]
