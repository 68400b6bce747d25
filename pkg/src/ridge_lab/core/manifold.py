"""
Ridges around a curved manifold.

A chart ``r`` embeds the slow coordinate x in the ambient space and the
normal offset ``y = eps u`` is measured in an orthonormal normal basis
Q(x), so an ambient point is ``w = r(x) + Q(x) y``. The frame carries
the metric tensor ``G = Dr^T Dr`` and the response matrices

    J = G^-1 Dr^T        (tangential)
    K = Q^T (I - Dr J)   (normal)

The limiting SDE simulated here, with ``sigma2 = G^-1 a0 ell^2``, is a
conjecture; results derived from it are tagged CONJECTURE.
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass
from enum import Enum

import numpy as np

from ridge_lab.core.accept import AcceptFunction
from ridge_lab.core.diagnostics import Estimate, mean_se
from ridge_lab.core.diffusion import (DiffusionPaths, VolatilityTable,
                                      default_dt, euler_maruyama)
from ridge_lab.errors import (DegenerateChartError, DimensionError,
                              ProjectionFailure)
from ridge_lab.utils.logging import get_logger
from ridge_lab.utils.rng import stream

logger = get_logger(__name__)

CONJECTURE = "CONJECTURE"
PROJECTION_MAX_ITER = 100
RANK_TOLERANCE = 1e-12
CANDIDATE_TOLERANCE = 1e-6

# ── charts ───────────────────────────────────────────────────────────


@dataclass(frozen=True)
class ManifoldChart:
	"""A chart ``r: R^n_x -> R^(n_x + n_y)`` with its Jacobian.

	``guess`` maps an ambient point to a starting chart coordinate for
	projection. The circle is only locally invertible; its angle is
	tracked continuously by warm-started projection.
	"""

	name: str
	n_x: int
	n_y: int
	r: Callable[[np.ndarray], np.ndarray]
	Dr: Callable[[np.ndarray], np.ndarray]
	guess: Callable[[np.ndarray], np.ndarray]
	globally_invertible: bool = True

	@property
	def ambient_dim(self) -> int:
		return self.n_x + self.n_y


def parabola() -> ManifoldChart:
	"""``r(x) = (x, x^2)``."""
	return ManifoldChart(
	    "parabola", 1, 1,
	    r=lambda x: np.array([x[0], x[0]**2]),
	    Dr=lambda x: np.array([[1.0], [2.0 * x[0]]]),
	    guess=lambda w: np.array([w[0]]))


def circle() -> ManifoldChart:
	"""``r(theta) = (cos theta, sin theta)``, locally invertible only."""
	return ManifoldChart(
	    "circle", 1, 1,
	    r=lambda x: np.array([np.cos(x[0]), np.sin(x[0])]),
	    Dr=lambda x: np.array([[-np.sin(x[0])], [np.cos(x[0])]]),
	    guess=lambda w: np.array([np.arctan2(w[1], w[0])]),
	    globally_invertible=False)


_CHARTS: dict[str, Callable[[], ManifoldChart]] = {
    "parabola": parabola,
    "circle": circle,
}


def build_chart(name: str) -> ManifoldChart:
	try:
		return _CHARTS[name]()
	except KeyError:
		raise ValueError(f"unknown chart {name!r}; "
		                 f"expected one of {sorted(_CHARTS)}") from None


def builtin_chart_ids() -> list[str]:
	return sorted(_CHARTS)


def _chart_point(chart: ManifoldChart, x) -> np.ndarray:
	x = np.atleast_1d(np.asarray(x, dtype=float))
	if x.shape != (chart.n_x,):
		raise DimensionError(f"chart coordinate must have shape ({chart.n_x},), "
		                     f"got {x.shape}")
	return x


def _jacobian(chart: ManifoldChart, x: np.ndarray) -> np.ndarray:
	dr = np.asarray(chart.Dr(x), dtype=float)
	sv = np.linalg.svd(dr, compute_uv=False)
	if sv[-1] <= RANK_TOLERANCE * max(sv[0], 1.0):
		raise DegenerateChartError(
		    f"{chart.name}: Dr is rank deficient at x={x.tolist()}")
	return dr


def metric_tensor(chart: ManifoldChart, x) -> np.ndarray:
	"""Gram matrix ``Dr^T Dr`` of the chart tangent vectors.

	Raises:
		DegenerateChartError: When Dr(x) loses column rank.
	"""
	dr = _jacobian(chart, _chart_point(chart, x))
	return dr.T @ dr


# ── frames ───────────────────────────────────────────────────────────


@dataclass(frozen=True)
class TangentNormalFrame:
	x: np.ndarray
	G: np.ndarray
	Dr: np.ndarray
	Q_basis: np.ndarray
	J: np.ndarray
	K: np.ndarray

	@property
	def basis(self) -> np.ndarray:
		"""``[Dr | Q]``, the proposal's ambient basis."""
		return np.hstack([self.Dr, self.Q_basis])


def _normal_basis(dr: np.ndarray, p_normal: np.ndarray, n_y: int) -> np.ndarray:
	# Gram-Schmidt over projected canonical vectors, last one first.
	n = p_normal.shape[0]
	cols: list[np.ndarray] = []
	for k in range(n - 1, -1, -1):
		v = p_normal[:, k].copy()
		for q in cols:
			v -= (q @ v) * q
		norm = np.linalg.norm(v)
		if norm < CANDIDATE_TOLERANCE:
			continue
		cols.append(v / norm)
		if len(cols) == n_y:
			break
	if len(cols) < n_y:
		raise DegenerateChartError("normal space basis could not be completed")
	Q = np.column_stack(cols)
	if np.linalg.det(np.hstack([dr, Q])) < 0:
		Q[:, -1] = -Q[:, -1]
	return Q


def frame(chart: ManifoldChart, x) -> TangentNormalFrame:
	"""Tangent/normal frame at chart coordinate ``x``.

	Q is oriented so that ``det[Dr | Q] > 0``: on the parabola this is
	``(-2x, 1) / sqrt(1 + 4x^2)`` and on the circle the inward normal.
	"""
	x = _chart_point(chart, x)
	dr = _jacobian(chart, x)
	G = dr.T @ dr
	J = np.linalg.solve(G, dr.T)
	p_normal = np.eye(chart.ambient_dim) - dr @ J
	Q = _normal_basis(dr, p_normal, chart.n_y)
	return TangentNormalFrame(x, G, dr, Q, J, Q.T @ p_normal)


def frame_identities(chart: ManifoldChart, x) -> tuple[float, float]:
	"""Max-abs residuals of ``K J^T = 0`` and ``Dr^T Dr = G``."""
	fr = frame(chart, x)
	gram = np.einsum("ai,aj->ij", fr.Dr, fr.Dr)
	return (float(np.max(np.abs(fr.K @ fr.J.T))),
	        float(np.max(np.abs(gram - fr.G))))


# ── projection ───────────────────────────────────────────────────────


def project(chart: ManifoldChart,
            w,
            x_init=None,
            tol: float = 1e-12,
            max_iter: int = PROJECTION_MAX_ITER) -> np.ndarray:
	"""Chart coordinate of the closest manifold point to ``w``.

	Gauss-Newton on ``|r(x) - w|^2``, stopping when the gradient norm
	``|Dr^T (r(x) - w)|`` drops below ``tol``.

	Raises:
		ProjectionFailure: After ``max_iter`` iterations, or on a
			non-finite iterate, carrying the last residual.
	"""
	if tol <= 0:
		raise ValueError("tol must be > 0")
	w = np.asarray(w, dtype=float)
	if w.shape != (chart.ambient_dim,):
		raise DimensionError(f"ambient point must have shape "
		                     f"({chart.ambient_dim},), got {w.shape}")
	x = chart.guess(w) if x_init is None else _chart_point(chart, x_init)
	x = np.array(x, dtype=float)
	for _ in range(max_iter):
		res = chart.r(x) - w
		dr = chart.Dr(x)
		if np.linalg.norm(dr.T @ res) < tol:
			return x
		dx = np.linalg.lstsq(dr, -res, rcond=None)[0]
		x = x + dx
		if not np.all(np.isfinite(x)):
			break
	raise ProjectionFailure(float(np.linalg.norm(chart.r(x) - w)))


def tangent_normal_coords(chart: ManifoldChart,
                          w,
                          x_init=None) -> tuple[np.ndarray, np.ndarray]:
	"""Split ``w`` into its foot point ``x`` and normal offset ``y``."""
	x = project(chart, w, x_init)
	fr = frame(chart, x)
	return x, fr.Q_basis.T @ (np.asarray(w, dtype=float) - chart.r(x))


def ambient_point(chart: ManifoldChart, x, y) -> np.ndarray:
	"""``r(x) + Q(x) y``."""
	x = _chart_point(chart, x)
	return chart.r(x) + frame(chart, x).Q_basis @ np.atleast_1d(y)


# ── manifold RWM ─────────────────────────────────────────────────────


class StepKind(str, Enum):
	ISOTROPIC = "isotropic"
	ANISOTROPIC = "anisotropic"


@dataclass(frozen=True)
class StepSpec:
	"""Ambient proposal shape.

	Isotropic: ``w' = w + ell eps Z``. Anisotropic:
	``w' = w + ell (h Dr Z_x + eps Q Z_y)`` with ``h = eps**tangent_exponent``.
	"""

	kind: StepKind = StepKind.ISOTROPIC
	tangent_exponent: float = 0.5

	def __post_init__(self) -> None:
		object.__setattr__(self, "kind", StepKind(self.kind))
		if self.tangent_exponent <= 0:
			raise ValueError("tangent_exponent must be > 0")

	@classmethod
	def isotropic(cls) -> StepSpec:
		return cls(StepKind.ISOTROPIC)

	@classmethod
	def anisotropic(cls, tangent_exponent: float = 0.5) -> StepSpec:
		return cls(StepKind.ANISOTROPIC, tangent_exponent)

	def tangent_step(self, epsilon: float) -> float:
		if self.kind is StepKind.ISOTROPIC:
			return float(epsilon)
		return float(epsilon**self.tangent_exponent)


@dataclass(frozen=True)
class ManifoldTrajectory:
	"""States of a manifold chain: ambient ``w`` and its ``(x, u)`` split."""

	w: np.ndarray
	x: np.ndarray
	u: np.ndarray
	accepted: np.ndarray
	accept_probs: np.ndarray
	epsilon: float

	@property
	def n_steps(self) -> int:
		return int(self.accepted.size)

	@property
	def acceptance_rate(self) -> float:
		return float(np.mean(self.accepted)) if self.accepted.size else 0.0

	@property
	def mean_accept_prob(self) -> float:
		return float(np.mean(self.accept_probs)) if self.accept_probs.size else 0.0


LogFn = Callable[[np.ndarray], float]
LogFnXU = Callable[[np.ndarray, np.ndarray], float]


def _gaussian_log_q(basis: np.ndarray, scales: np.ndarray,
                    increment: np.ndarray) -> float:
	# log N(increment; 0, ell^2 M D^2 M^T) up to constants shared by both
	# directions.
	c = np.linalg.solve(basis, increment) / scales
	return float(-0.5 * c @ c - np.log(abs(np.linalg.det(basis))))


def manifold_rwm_run(chart: ManifoldChart,
                     A: LogFn,
                     B: LogFnXU,
                     epsilon: float,
                     ell: float,
                     F: AcceptFunction,
                     step_spec: StepSpec,
                     n_steps: int,
                     rng: np.random.Generator,
                     *,
                     x0=None,
                     u0=None) -> ManifoldTrajectory:
	"""Ambient RWM against ``exp(A(x) + B(x, y / eps)) / eps^n_y``.

	Each step draws one Gaussian vector (tangent components first) and
	then one uniform. The anisotropic proposal has a position-dependent
	covariance and carries the exact Gaussian Hastings term.

	Raises:
		ProjectionFailure: If a proposal cannot be projected; the step
			index is attached.
	"""
	if epsilon <= 0:
		raise ValueError("epsilon must be > 0")
	if ell <= 0:
		raise ValueError("ell must be > 0")
	if n_steps < 1:
		raise ValueError("n_steps must be >= 1")
	x = (np.zeros(chart.n_x) if x0 is None else _chart_point(chart, x0))
	u = np.zeros(chart.n_y) if u0 is None else np.atleast_1d(
	    np.asarray(u0, dtype=float))
	fr = frame(chart, x)
	w = chart.r(x) + fr.Q_basis @ (epsilon * u)
	h = step_spec.tangent_step(epsilon)
	scales = ell * np.concatenate([np.full(chart.n_x, h),
	                               np.full(chart.n_y, float(epsilon))])
	anisotropic = step_spec.kind is StepKind.ANISOTROPIC
	log_pi = A(x) + B(x, u)

	ws = np.empty((n_steps + 1, chart.ambient_dim))
	xs = np.empty((n_steps + 1, chart.n_x))
	us = np.empty((n_steps + 1, chart.n_y))
	accepted = np.zeros(n_steps, dtype=bool)
	probs = np.empty(n_steps)
	ws[0], xs[0], us[0] = w, x, u
	for k in range(n_steps):
		z = rng.standard_normal(chart.ambient_dim)
		xi = rng.random()
		if anisotropic:
			dw = fr.basis @ (scales * z)
		else:
			dw = ell * epsilon * z
		w_new = w + dw
		try:
			x_new = project(chart, w_new, x_init=x)
		except ProjectionFailure as exc:
			raise ProjectionFailure(exc.residual, step=k) from exc
		fr_new = frame(chart, x_new)
		u_new = fr_new.Q_basis.T @ (w_new - chart.r(x_new)) / epsilon
		log_pi_new = A(x_new) + B(x_new, u_new)
		ratio = log_pi_new - log_pi
		if anisotropic:
			ratio += (_gaussian_log_q(fr_new.basis, scales, -dw) -
			          _gaussian_log_q(fr.basis, scales, dw))
		p = float(F.evaluate_fn(np.asarray(ratio)))
		probs[k] = p
		if xi < p:
			w, x, u, fr, log_pi = w_new, x_new, u_new, fr_new, log_pi_new
			accepted[k] = True
		ws[k + 1], xs[k + 1], us[k + 1] = w, x, u
	logger.debug("%s chain eps=%g: acceptance %.3f", chart.name, epsilon,
	             float(accepted.mean()))
	return ManifoldTrajectory(ws, xs, us, accepted, probs, float(epsilon))


# ── conjectured limit ────────────────────────────────────────────────

USampler = Callable[[np.ndarray, int, np.random.Generator], np.ndarray]


def manifold_a0(chart: ManifoldChart, B: LogFnXU, u_sampler: USampler,
                F: AcceptFunction, x, ell: float, n_mc: int,
                rng: np.random.Generator) -> Estimate:
	"""Mean acceptance at x when u moves by ``ell K(x) Z``.

	``u_sampler(x, count, rng)`` draws from exp(B(x, .)) with shape
	``(count, n_y)``. ``B`` must broadcast over the leading axes of u.
	"""
	x = _chart_point(chart, x)
	K = frame(chart, x).K
	U = np.asarray(u_sampler(x, n_mc, rng), dtype=float).reshape(n_mc, -1)
	Z = rng.standard_normal((n_mc, chart.ambient_dim))
	U_new = U + ell * Z @ K.T
	db = (np.asarray(B(x, U_new), dtype=float) -
	      np.asarray(B(x, U), dtype=float))
	return mean_se(F.evaluate_fn(db))


def manifold_a0_model(chart: ManifoldChart,
                      B: LogFnXU,
                      u_sampler: USampler,
                      F: AcceptFunction,
                      n_mc: int = 20000,
                      seed: int = 0) -> Callable[[float, float], float]:
	"""``(x, ell) -> a0`` with common random numbers across x."""

	def a0(x: float, ell: float) -> float:
		return manifold_a0(chart, B, u_sampler, F, [x], ell, n_mc,
		                   stream(seed, "manifold-a0")).value

	return a0


def conjecture_sigma2(chart: ManifoldChart, a0_model: Callable[[float, float],
                                                                float],
                      x: float, ell: float) -> float:
	"""``G(x)^-1 a0(x, ell) ell^2`` for a one-dimensional chart."""
	G = metric_tensor(chart, [x])
	return float(a0_model(x, ell) * ell**2 / G[0, 0])


def conjecture_sde_simulate(chart: ManifoldChart,
                            A: LogFn,
                            a0_model: Callable[[float, float], float],
                            ell: float,
                            T: float,
                            dt: float | None,
                            n_paths: int,
                            rng: np.random.Generator,
                            *,
                            init,
                            x_grid,
                            grad_A: Callable[[np.ndarray], np.ndarray]
                            | None = None,
                            record_every: int = 1) -> DiffusionPaths:
	"""Euler-Maruyama for the CONJECTURE SDE on a one-dimensional chart.

	The drift is ``1/2 grad sigma2 + 1/2 sigma2 grad A`` in chart
	coordinates. ``init`` is an array of starting coordinates or a
	sampler ``(count, rng) -> (count, 1)`` for exp(A).
	"""
	if chart.n_x != 1:
		raise DimensionError("conjecture_sde_simulate supports n_x == 1")
	if grad_A is None:

		def grad_A(x: np.ndarray, step: float = 1e-5) -> np.ndarray:
			return np.array([[(A(p + step) - A(p - step)) / (2 * step)]
			                 for p in np.asarray(x, dtype=float).reshape(-1, 1)
			                ]).reshape(np.shape(x))

	table = VolatilityTable.from_function(
	    lambda x: conjecture_sigma2(chart, a0_model, x, ell), grad_A, x_grid)
	if dt is None:
		dt = default_dt(table.sigma2_max)
	if callable(init):
		x0 = np.asarray(init(n_paths, rng), dtype=float).reshape(n_paths, 1)
	else:
		x0 = np.broadcast_to(np.asarray(init, dtype=float).reshape(-1, 1),
		                     (n_paths, 1)).copy()
	logger.info("%s: simulating %s SDE with %d paths", chart.name, CONJECTURE,
	            n_paths)
	return euler_maruyama(table.drift_at, table.sigma2_at, x0, T, dt, rng,
	                      record_every)


__all__ = [
    "CONJECTURE",
    "ManifoldChart",
    "ManifoldTrajectory",
    "StepKind",
    "StepSpec",
    "TangentNormalFrame",
    "ambient_point",
    "build_chart",
    "builtin_chart_ids",
    "circle",
    "conjecture_sde_simulate",
    "conjecture_sigma2",
    "frame",
    "frame_identities",
    "manifold_a0",
    "manifold_a0_model",
    "manifold_rwm_run",
    "metric_tensor",
    "parabola",
    "project",
    "tangent_normal_coords",
]
