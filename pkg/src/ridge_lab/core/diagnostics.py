"""
Chain diagnostics: ESJD, autocorrelation, IACT, KS distance and
log-log scaling fits.
"""

from __future__ import annotations

from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from ridge_lab.utils.logging import get_logger

logger = get_logger(__name__)


@dataclass(frozen=True)
class Estimate:
	"""A Monte Carlo estimate with its standard error.

	Unpacks as ``value, se = estimate``.
	"""

	value: float
	se: float
	warnings: tuple[str, ...] = ()

	def __iter__(self) -> Iterator[float]:
		yield self.value
		yield self.se

	def flagged(self) -> bool:
		return bool(self.warnings)


def mean_se(samples) -> Estimate:
	"""Sample mean and its i.i.d. standard error."""
	arr = np.asarray(samples, dtype=float).ravel()
	if arr.size == 0:
		raise ValueError("samples must be nonempty")
	se = float(arr.std(ddof=1) / np.sqrt(arr.size)) if arr.size > 1 else 0.0
	return Estimate(float(arr.mean()), se)


def batch_means_se(series, n_batches: int = 50) -> Estimate:
	"""Mean of a correlated series with a batch-means standard error."""
	arr = np.asarray(series, dtype=float).ravel()
	size = arr.size // n_batches
	if size < 1:
		return mean_se(arr)
	means = arr[:size * n_batches].reshape(n_batches, size).mean(axis=1)
	return Estimate(float(arr.mean()),
	                float(means.std(ddof=1) / np.sqrt(n_batches)))


def _states(trajectory, selector) -> np.ndarray:
	if hasattr(trajectory, "x") and hasattr(trajectory, "u"):
		x = np.asarray(trajectory.x, dtype=float)
		u = np.asarray(trajectory.u, dtype=float)
		if selector == "x":
			return x
		if selector == "u":
			return u
		full = np.concatenate([x, u], axis=-1)
	else:
		full = np.asarray(trajectory, dtype=float)
		if full.ndim == 1:
			full = full[:, None]
	if selector in (None, "all"):
		return full
	return full[:, list(np.atleast_1d(selector))]


def esjd(trajectory, coordinate_selector="all") -> float:
	"""Mean squared one-step displacement of the selected coordinates.

	Parameters:
		trajectory: A Trajectory, or an array of states ``(n, d)``.
		coordinate_selector: ``"x"``, ``"u"``, ``"all"`` or column indices
			(indices refer to the ``[x, u]`` concatenation).

	Raises:
		ValueError: With fewer than two states.
	"""
	states = _states(trajectory, coordinate_selector)
	if states.shape[0] < 2:
		raise ValueError("esjd needs at least two states")
	jumps = np.diff(states, axis=0)
	return float(np.mean(np.sum(jumps**2, axis=-1)))


def acf(series, max_lag: int) -> np.ndarray:
	"""Biased-normalized autocorrelation at lags ``0..max_lag`` via FFT.

	Raises:
		ValueError: If the series is shorter than ``10 * max_lag``.
	"""
	x = np.asarray(series, dtype=float).ravel()
	n = x.size
	if max_lag < 0 or n < max(10 * max_lag, 2):
		raise ValueError("series length must be at least 10 * max_lag")
	return _autocorr(x)[:max_lag + 1]


def _autocorr(x: np.ndarray) -> np.ndarray:
	n = x.size
	d = x - x.mean()
	size = 1 << (2 * n - 1).bit_length()
	f = np.fft.rfft(d, size)
	cov = np.fft.irfft(f * np.conj(f), size)[:n] / n
	if cov[0] <= 0:
		return np.full(n, np.nan)
	return cov / cov[0]


@dataclass(frozen=True)
class IACTResult:
	"""Integrated autocorrelation time with its summation window."""

	tau: float
	window: int
	converged: bool
	degenerate: bool = False


def iact(series) -> IACTResult:
	"""IACT by the initial positive sequence estimator.

	Sums pairs ``rho(2k) + rho(2k + 1)`` while they stay positive; tau is
	``2 * sum - 1``. The result is flagged as not converged when the
	window exceeds a tenth of the series length; a constant series is
	flagged degenerate.
	"""
	x = np.asarray(series, dtype=float).ravel()
	n = x.size
	if n < 4:
		raise ValueError("iact needs at least four values")
	if np.ptp(x) == 0.0:
		return IACTResult(float("nan"), 0, False, True)
	rho = _autocorr(x)
	total = 0.0
	window = 1
	for k in range(n // 2):
		pair = rho[2 * k] + rho[2 * k + 1]
		if pair <= 0.0:
			break
		total += pair
		window = 2 * k + 1
	tau = max(2.0 * total - 1.0, 1e-12)
	converged = window <= n / 10
	if not converged:
		logger.warning("IACT window %d exceeds n/10 for n=%d", window, n)
	return IACTResult(float(tau), int(window), converged)


@dataclass(frozen=True)
class KSResult:
	statistic: float
	pvalue: float

	def __iter__(self) -> Iterator[float]:
		yield self.statistic
		yield self.pvalue


def ks_distance(sample_a, sample_b) -> KSResult:
	"""Two-sample Kolmogorov-Smirnov statistic with asymptotic p-value."""
	a = np.asarray(sample_a, dtype=float).ravel()
	b = np.asarray(sample_b, dtype=float).ravel()
	if a.size == 0 or b.size == 0:
		raise ValueError("both samples must be nonempty")
	res = stats.ks_2samp(a, b, method="asymp")
	return KSResult(float(res.statistic), float(res.pvalue))


# ── scaling fits ─────────────────────────────────────────────────────


@dataclass(frozen=True)
class ScalingFit:
	"""Slope of log(statistic) against log(eps) with a 95% half-width."""

	slope: float
	half_width: float
	intercept: float
	stderr: float
	n_points: int

	def __iter__(self) -> Iterator[float]:
		yield self.slope
		yield self.half_width


@dataclass(frozen=True)
class ScalingRow:
	epsilon: float
	mode: str
	statistic: float
	se: float = 0.0
	flagged: bool = False


@dataclass
class ScalingTable:
	"""Rows of ``(eps, mode, statistic, SE)`` plus per-mode fits."""

	rows: list[ScalingRow] = field(default_factory=list)

	def add(self, row: ScalingRow) -> None:
		self.rows.append(row)

	def modes(self) -> list[str]:
		return sorted({r.mode for r in self.rows})

	def select(self, mode: str) -> list[ScalingRow]:
		return sorted((r for r in self.rows if r.mode == mode),
		              key=lambda r: r.epsilon)

	def fit(self, mode: str) -> ScalingFit:
		rows = self.select(mode)
		return scaling_fit([(r.epsilon, r.statistic) for r in rows])


def scaling_fit(table) -> ScalingFit:
	"""Least-squares slope of log(statistic) on log(eps).

	Parameters:
		table: A ScalingTable with a single mode, or ``(eps, statistic)``
			pairs.

	Raises:
		ValueError: With fewer than three points or nonpositive values.
	"""
	if isinstance(table, ScalingTable):
		modes = table.modes()
		if len(modes) != 1:
			raise ValueError("scaling_fit on a table needs exactly one mode")
		return table.fit(modes[0])
	pairs = np.asarray(list(table), dtype=float)
	if pairs.ndim != 2 or pairs.shape[0] < 3:
		raise ValueError("scaling_fit needs at least three (eps, value) pairs")
	if np.any(pairs <= 0.0) or not np.all(np.isfinite(pairs)):
		raise ValueError("scaling_fit needs positive finite values")
	res = stats.linregress(np.log(pairs[:, 0]), np.log(pairs[:, 1]))
	n = pairs.shape[0]
	half = float(stats.t.ppf(0.975, n - 2) * res.stderr)
	return ScalingFit(float(res.slope), half, float(res.intercept),
	                  float(res.stderr), n)


def split_discrepancy(series: Sequence[float] | np.ndarray) -> float:
	"""Difference of half-chain means in units of their combined SE."""
	arr = np.asarray(series, dtype=float).ravel()
	half = arr.size // 2
	if half < 2:
		return 0.0
	a = batch_means_se(arr[:half], n_batches=20)
	b = batch_means_se(arr[half:2 * half], n_batches=20)
	combined = np.hypot(a.se, b.se)
	if combined == 0.0:
		return 0.0 if a.value == b.value else float("inf")
	return float(abs(a.value - b.value) / combined)


__all__ = [
    "Estimate",
    "IACTResult",
    "KSResult",
    "ScalingFit",
    "ScalingRow",
    "ScalingTable",
    "acf",
    "batch_means_se",
    "esjd",
    "iact",
    "ks_distance",
    "mean_se",
    "scaling_fit",
    "split_discrepancy",
]
