"""
Deterministic acceptance checks for experiment results.

Each check is a pure function of measured numbers returning a
``CheckRecord``. Experiments call the checks that apply to them and
``collect_checks`` wraps the records into a ``CheckResult``.
"""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np

from ridge_lab.models.check_result import CheckRecord, CheckResult

# Default gates; experiment files may override any of them by name.
DEFAULT_TOLERANCES: dict[str, float] = {
    "reversibility": 1e-12,
    "a0_agreement_se": 3.0,
    "a0_max_misses": 0.0,
    "autocorrelation": 0.05,
    "ks_level": 0.01,
    "generator_slope_min": 1.5,
    "generator_slope_max": 2.5,
    "averaging_gap": 1e-2,
    "local_0234": 0.02,
    "optimum_0234": 1e-3,
    "slope_unit_ny1": 0.25,
    "slope_scaled_ny1": 0.25,
    "slope_modes_ny2": 0.3,
    "slope_unit_ny3": 0.4,
    "jump_rate_slope": 0.3,
    "holding_time_rel": 0.10,
    "jump_ks_level": 0.05,
    "jump_rate_se": 4.0,
    "generator_agreement_se": 4.0,
    "coupling_se": 2.0,
    "kj_orthogonality": 1e-10,
    "metric_identity": 1e-12,
    "round_trip": 1e-8,
    "speed_identity_se": 4.0,
    "stationary_se": 5.0,
    "acceptance_rate": 0.02,
    "frame_smoothness": 1e-4,
}


def _finite(value: float) -> bool:
	return value is not None and bool(np.isfinite(value))


def max_abs_below(name: str, value: float, bound: float) -> CheckRecord:
	"""Pass when ``value <= bound``."""
	ok = _finite(value) and value <= bound
	return CheckRecord(name=name,
	                   passed=ok,
	                   value=float(value),
	                   expected=f"<= {bound:g}",
	                   message=f"{value:.3e} vs bound {bound:.1e}")


def within_interval(name: str,
                    value: float,
                    low: float,
                    high: float,
                    severity: str = "error") -> CheckRecord:
	"""Pass when ``low <= value <= high``."""
	ok = _finite(value) and low <= value <= high
	return CheckRecord(name=name,
	                   passed=ok,
	                   value=float(value),
	                   expected=f"[{low:g}, {high:g}]",
	                   severity=severity)


def all_within_interval(name: str,
                        values: Sequence[float],
                        low: float,
                        high: float,
                        severity: str = "error") -> CheckRecord:
	"""Pass when every one of ``values`` lies in ``[low, high]``.

	The record's value is the number of entries outside the window.
	"""
	v = np.asarray(values, dtype=float)
	outside = int(np.sum(~((v >= low) & (v <= high))))
	return CheckRecord(name=name,
	                   passed=bool(v.size) and outside == 0,
	                   value=float(outside),
	                   expected=f"all {v.size} in [{low:g}, {high:g}]",
	                   message=", ".join(f"{x:.4g}" for x in v),
	                   severity=severity)


def within_tolerance(name: str, value: float, target: float,
                     tol: float) -> CheckRecord:
	"""Pass when ``|value - target| <= tol``."""
	rec = within_interval(name, value, target - tol, target + tol)
	return rec.model_copy(update={"expected": f"{target:g} +/- {tol:g}"})


def within_se(name: str, value: float, target: float, se: float,
              n_se: float) -> CheckRecord:
	"""Pass when ``value`` is within ``n_se`` standard errors of ``target``."""
	gap = abs(value - target)
	ok = _finite(value) and gap <= n_se * se
	return CheckRecord(name=name,
	                   passed=ok,
	                   value=float(value),
	                   expected=f"{target:.6g} within {n_se:g} SE ({se:.2g})",
	                   message=f"gap {gap:.3g}")


def ks_not_rejected(name: str, pvalue: float, level: float) -> CheckRecord:
	"""Two-sample KS gate: the p-value must exceed ``level``."""
	return CheckRecord(name=name,
	                   passed=_finite(pvalue) and pvalue > level,
	                   value=float(pvalue),
	                   expected=f"p > {level:g}")


def agreement_count(name: str, gaps_in_se: Sequence[float], n_se: float,
                    max_misses: int) -> CheckRecord:
	"""Pairs of estimates that disagree by more than ``n_se`` combined SE."""
	gaps = np.asarray(gaps_in_se, dtype=float)
	misses = int(np.sum(~(gaps <= n_se)))
	return CheckRecord(name=name,
	                   passed=misses <= max_misses,
	                   value=float(misses),
	                   expected=f"<= {max_misses} of {gaps.size} beyond "
	                   f"{n_se:g} SE",
	                   message=f"max gap {np.nanmax(gaps):.2f} SE"
	                   if gaps.size else None)


def nonincreasing(name: str,
                  values: Sequence[float],
                  ses: Sequence[float],
                  n_se: float = 0.0,
                  severity: str = "error") -> CheckRecord:
	"""Each value may exceed its predecessor by at most ``n_se`` combined SE."""
	v = np.asarray(values, dtype=float)
	s = np.asarray(ses, dtype=float)
	rises = np.diff(v) - n_se * np.hypot(s[1:], s[:-1])
	ok = bool(v.size >= 2 and np.all(rises <= 0.0))
	return CheckRecord(name=name,
	                   passed=ok,
	                   value=float(np.max(rises)) if v.size >= 2 else None,
	                   expected=f"non-increasing within {n_se:g} SE",
	                   message=", ".join(f"{x:.4g}" for x in v),
	                   severity=severity)


def strictly_decreasing(name: str,
                        values: Sequence[float],
                        severity: str = "error") -> CheckRecord:
	v = np.asarray(values, dtype=float)
	ok = bool(v.size >= 2 and np.all(np.diff(v) < 0.0))
	return CheckRecord(name=name,
	                   passed=ok,
	                   expected="strictly decreasing",
	                   message=", ".join(f"{x:.4g}" for x in v),
	                   severity=severity)


def report_only(name: str, value: float, message: str | None = None
               ) -> CheckRecord:
	"""An informational record; never fails a run."""
	return CheckRecord(name=name,
	                   passed=True,
	                   value=float(value),
	                   message=message,
	                   severity="info")


def collect_checks(experiment: str,
                   records: Sequence[CheckRecord]) -> CheckResult:
	return CheckResult(experiment=experiment, checks=list(records))


__all__ = [
    "DEFAULT_TOLERANCES",
    "agreement_count",
    "all_within_interval",
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
