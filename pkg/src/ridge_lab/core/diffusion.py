"""
Diffusion limit of RWM with h(eps) = eps.

Accelerated by eps^-2, the slow coordinate converges to the SDE

    dX = (1/2 grad sigma2 + 1/2 sigma2 grad A) dt + sqrt(sigma2) dW,

with ``sigma2(x) = ell(x)^2 a0(x, ell(x))`` and a0 the mean acceptance
probability when u sits at its conditional law exp(B(x, .)).

This module estimates a0 (two Monte Carlo estimators plus a lattice
cache), assembles sigma2 and the drift, integrates the SDE by
Euler-Maruyama, searches for the ESJD-optimal ell, and evaluates the
generator identities that tie the chain to its limit.
"""

from __future__ import annotations

import csv
from collections.abc import Callable
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy.integrate import simpson
from scipy.interpolate import CubicSpline, RegularGridInterpolator
from scipy.optimize import minimize_scalar

from ridge_lab.core.accept import AcceptFunction, derivative
from ridge_lab.core.bumps import TestFunction
from ridge_lab.core.diagnostics import (Estimate, batch_means_se, mean_se,
                                        split_discrepancy)
from ridge_lab.core.quadrature import (a0_quadrature, conditional_expectation,
                                       gauss_hermite_tensor)
from ridge_lab.core.rwm import (InterpolatedEll, ProposalRule, StepMode,
                                acceptance_log_ratio, run_pinned_ensemble)
from ridge_lab.core.targets import MultiscaleTarget, as_coords
from ridge_lab.errors import (DimensionError, IntegrationBlowup,
                              NonDifferentiableError, UnsupportedTargetError)
from ridge_lab.utils.logging import get_logger
from ridge_lab.utils.rng import stream

logger = get_logger(__name__)

A0_METHODS = ("exact_conditional", "pinned_ergodic")
SPLIT_TOLERANCE_SE = 5.0

# ── a0 estimation ────────────────────────────────────────────────────


@dataclass(frozen=True)
class A0Lattice:
	"""a0 estimates on an ``(x, ell)`` grid for one-dimensional x."""

	x_grid: np.ndarray
	ell_grid: np.ndarray
	values: np.ndarray
	se: np.ndarray

	def __post_init__(self) -> None:
		shape = (len(self.x_grid), len(self.ell_grid))
		if np.shape(self.values) != shape or np.shape(self.se) != shape:
			raise ValueError(f"lattice arrays must have shape {shape}")

	@classmethod
	def build(cls, estimator: A0Estimator, x_grid,
	          ell_grid) -> A0Lattice:
		"""Fill the lattice, one estimate per cell, in row-major order."""
		if estimator.target.n_x != 1:
			raise DimensionError("a0 lattices need n_x == 1")
		xg = np.asarray(x_grid, dtype=float)
		lg = np.asarray(ell_grid, dtype=float)
		values = np.empty((xg.size, lg.size))
		se = np.empty_like(values)
		for i, x in enumerate(xg):
			for j, ell in enumerate(lg):
				est = estimator.estimate([x], ell)
				values[i, j] = est.value
				se[i, j] = est.se
			logger.debug("a0 lattice row x=%g done", x)
		return cls(xg, lg, values, se)

	def covers(self, x, ell: float) -> bool:
		xv = float(np.ravel(x)[0])
		return (self.x_grid[0] <= xv <= self.x_grid[-1] and
		        self.ell_grid[0] <= ell <= self.ell_grid[-1])

	def interpolate(self, x, ell: float) -> Estimate:
		"""Bilinear interpolation of value and SE."""
		point = np.array([[float(np.ravel(x)[0]), float(ell)]])
		grid = (self.x_grid, self.ell_grid)
		val = RegularGridInterpolator(grid, self.values)(point)[0]
		se = RegularGridInterpolator(grid, self.se)(point)[0]
		return Estimate(float(val), float(se))

	def to_csv(self, path: Path | str) -> None:
		"""Write rows ``x, ell, estimate, se``."""
		with Path(path).open("w", newline="", encoding="utf-8") as fh:
			writer = csv.writer(fh)
			writer.writerow(["x", "ell", "estimate", "se"])
			for i, x in enumerate(self.x_grid):
				for j, ell in enumerate(self.ell_grid):
					writer.writerow([
					    format(v, ".17g")
					    for v in (x, ell, self.values[i, j], self.se[i, j])
					])

	@classmethod
	def from_csv(cls, path: Path | str) -> A0Lattice:
		"""Read a lattice written by ``to_csv``.

		Raises:
			ValueError: If the rows do not form a full grid.
		"""
		with Path(path).open(encoding="utf-8") as fh:
			rows = [(float(r["x"]), float(r["ell"]), float(r["estimate"]),
			         float(r["se"])) for r in csv.DictReader(fh)]
		xg = np.unique([r[0] for r in rows])
		lg = np.unique([r[1] for r in rows])
		if len(rows) != xg.size * lg.size:
			raise ValueError("a0 lattice CSV is not a full grid")
		values = np.full((xg.size, lg.size), np.nan)
		se = np.full_like(values, np.nan)
		for x, ell, v, s in rows:
			i = int(np.searchsorted(xg, x))
			j = int(np.searchsorted(lg, ell))
			values[i, j] = v
			se[i, j] = s
		if np.isnan(values).any():
			raise ValueError("a0 lattice CSV is not a full grid")
		return cls(xg, lg, values, se)


@dataclass
class A0Estimator:
	"""Monte Carlo estimator of a0(x, ell) with a memo cache.

	Each call reseeds from ``seed``, so estimates at different ``(x, ell)``
	share random numbers. ``exact_conditional`` draws u from the exact
	conditional sampler first and the Gaussian increments second;
	``pinned_ergodic`` averages F along a pinned chain after ``burn_in``.
	"""

	target: MultiscaleTarget
	accept: AcceptFunction
	method: str = "exact_conditional"
	n_mc: int = 20_000
	burn_in: int = 2_000
	seed: int = 0
	lattice: A0Lattice | None = None
	interpolate: bool = False
	_cache: dict = field(default_factory=dict, repr=False)

	def __post_init__(self) -> None:
		if self.method not in A0_METHODS:
			raise ValueError(f"unknown a0 method {self.method!r}")
		if self.n_mc < 2:
			raise ValueError("n_mc must be >= 2")
		if self.burn_in < 0:
			raise ValueError("burn_in must be >= 0")

	def estimate(self, x, ell: float) -> Estimate:
		if not ell > 0:
			raise ValueError("ell must be > 0")
		xa = as_coords(x, self.target.n_x, "x").reshape(self.target.n_x)
		if (self.interpolate and self.lattice is not None and
		    self.lattice.covers(xa, ell)):
			return self.lattice.interpolate(xa, ell)
		key = (tuple(xa.tolist()), float(ell))
		cached = self._cache.get(key)
		if cached is not None:
			return cached
		if self.method == "exact_conditional":
			est = self._exact(xa, float(ell))
		else:
			est = self._pinned(xa, float(ell))
		self._cache[key] = est
		return est

	def _exact(self, x: np.ndarray, ell: float) -> Estimate:
		t = self.target
		if t.conditional_sampler is None:
			raise UnsupportedTargetError(
			    f"target {t.name!r} has no exact conditional sampler")
		rng = stream(self.seed, "a0-exact")
		xs = np.broadcast_to(x, (self.n_mc, t.n_x))
		u = t.conditional_sampler(xs, rng)
		z = rng.standard_normal((self.n_mc, t.n_y))
		db = t.B(xs, u + ell * z) - t.B(xs, u)
		return mean_se(self.accept.evaluate_fn(db))

	def _pinned(self, x: np.ndarray, ell: float) -> Estimate:
		t = self.target
		rng = stream(self.seed, "a0-pinned")
		if t.conditional_sampler is not None:
			u0 = t.conditional_sampler(x[None, :], rng)
		else:
			u0 = np.zeros((1, t.n_y))
		_, probs, _ = run_pinned_ensemble(t,
		                                  x[None, :],
		                                  ell,
		                                  self.accept,
		                                  self.burn_in + self.n_mc,
		                                  u0, [rng],
		                                  record=False)
		series = probs[0, self.burn_in:]
		est = batch_means_se(series)
		disc = split_discrepancy(series)
		if disc > SPLIT_TOLERANCE_SE:
			msg = (f"pinned chain halves differ by {disc:.1f} SE at "
			       f"x={x.tolist()}, ell={ell:g}")
			logger.warning(msg)
			return Estimate(est.value, est.se, (msg,))
		return est


@dataclass
class DiffusionModel:
	"""sigma2 and drift of the limiting SDE, backed by an a0 estimator."""

	target: MultiscaleTarget
	rule: ProposalRule
	a0: A0Estimator
	fd_step: float = 1e-3

	def __post_init__(self) -> None:
		if self.fd_step <= 0:
			raise ValueError("fd_step must be > 0")

	@property
	def accept(self) -> AcceptFunction:
		return self.a0.accept

	def ell_at(self, x) -> float:
		xa = as_coords(x, self.target.n_x, "x").reshape(self.target.n_x)
		return float(self.rule.ell_at(xa))


def estimate_a0(model: DiffusionModel, x, ell: float) -> Estimate:
	"""a0(x, ell) with its standard error."""
	return model.a0.estimate(x, ell)


def sigma2(model: DiffusionModel, x) -> Estimate:
	"""Volatility ``ell(x)^2 a0(x, ell(x))``."""
	ell = model.ell_at(x)
	est = model.a0.estimate(x, ell)
	return Estimate(ell**2 * est.value, ell**2 * est.se, est.warnings)


def grad_sigma2(model: DiffusionModel, x) -> np.ndarray:
	"""Central-difference gradient of sigma2 with common random numbers."""
	xa = as_coords(x, model.target.n_x, "x").reshape(model.target.n_x)
	grad = np.empty(model.target.n_x)
	for i in range(model.target.n_x):
		e = np.zeros(model.target.n_x)
		e[i] = model.fd_step
		up = sigma2(model, xa + e).value
		dn = sigma2(model, xa - e).value
		grad[i] = (up - dn) / (2.0 * model.fd_step)
	return grad


def drift(model: DiffusionModel, x) -> np.ndarray:
	"""``1/2 grad sigma2 + 1/2 sigma2 grad A`` at x."""
	xa = as_coords(x, model.target.n_x, "x").reshape(model.target.n_x)
	s2 = sigma2(model, xa).value
	return 0.5 * grad_sigma2(model, xa) + 0.5 * s2 * model.target.grad_A(xa)


# ── SDE integration ──────────────────────────────────────────────────


@dataclass(frozen=True)
class VolatilityTable:
	"""sigma2 and its gradient tabulated on a 1-d grid, spline-interpolated.

	Outside the grid sigma2 is held at its end value and its gradient is
	zero; the drift keeps the exact grad A term everywhere.
	"""

	x_grid: np.ndarray
	sigma2: np.ndarray
	grad_sigma2: np.ndarray
	grad_A: Callable[[np.ndarray], np.ndarray]

	@classmethod
	def from_model(cls, model: DiffusionModel, x_grid) -> VolatilityTable:
		if model.target.n_x != 1:
			raise DimensionError("volatility tables need n_x == 1")
		xg = np.asarray(x_grid, dtype=float)
		s2 = np.array([sigma2(model, [x]).value for x in xg])
		g = np.array([grad_sigma2(model, [x])[0] for x in xg])
		return cls(xg, s2, g, model.target.grad_A)

	@classmethod
	def from_function(cls,
	                  sigma2_fn: Callable[[float], float],
	                  grad_A: Callable[[np.ndarray], np.ndarray],
	                  x_grid,
	                  fd_step: float = 1e-3) -> VolatilityTable:
		xg = np.asarray(x_grid, dtype=float)
		s2 = np.array([sigma2_fn(x) for x in xg])
		g = np.array([(sigma2_fn(x + fd_step) - sigma2_fn(x - fd_step)) /
		              (2.0 * fd_step) for x in xg])
		return cls(xg, s2, g, grad_A)

	@property
	def sigma2_max(self) -> float:
		return float(np.max(self.sigma2))

	def _splines(self) -> tuple[CubicSpline, CubicSpline]:
		cached = self.__dict__.get("_spl")
		if cached is None:
			cached = (CubicSpline(self.x_grid, self.sigma2),
			          CubicSpline(self.x_grid, self.grad_sigma2))
			object.__setattr__(self, "_spl", cached)
		return cached

	def sigma2_at(self, x: np.ndarray) -> np.ndarray:
		xs = np.clip(np.asarray(x, dtype=float)[..., 0], self.x_grid[0],
		             self.x_grid[-1])
		return np.maximum(self._splines()[0](xs), 0.0)

	def drift_at(self, x: np.ndarray) -> np.ndarray:
		x = np.asarray(x, dtype=float)
		xv = x[..., 0]
		inside = (xv >= self.x_grid[0]) & (xv <= self.x_grid[-1])
		g = np.where(inside, self._splines()[1](np.clip(xv, self.x_grid[0],
		                                                self.x_grid[-1])), 0.0)
		return (0.5 * g[..., None] +
		        0.5 * self.sigma2_at(x)[..., None] * self.grad_A(x))


@dataclass(frozen=True)
class DiffusionPaths:
	"""Euler-Maruyama ensemble; ``x`` has shape ``(n_paths, n_rec, n_x)``."""

	times: np.ndarray
	x: np.ndarray
	dt: float

	def at_time(self, t: float) -> np.ndarray:
		"""States at the recorded time closest to ``t``."""
		k = int(np.argmin(np.abs(self.times - t)))
		return self.x[:, k]


def euler_maruyama(drift_fn: Callable[[np.ndarray], np.ndarray],
                   sigma2_fn: Callable[[np.ndarray], np.ndarray],
                   x0,
                   T: float,
                   dt: float,
                   rng: np.random.Generator,
                   record_every: int = 1) -> DiffusionPaths:
	"""Integrate ``dX = b dt + sqrt(sigma2) dW`` with a fixed step.

	Raises:
		IntegrationBlowup: On the first non-finite state, naming the path
			and the step.
	"""
	if dt <= 0:
		raise ValueError("dt must be > 0")
	if T < dt:
		raise ValueError("T must be >= dt")
	x = np.array(x0, dtype=float, copy=True)
	if x.ndim == 1:
		x = x[:, None]
	n_steps = int(round(T / dt))
	n_rec = n_steps // record_every + 1
	out = np.empty((x.shape[0], n_rec, x.shape[1]))
	out[:, 0] = x
	sqdt = np.sqrt(dt)
	for k in range(1, n_steps + 1):
		vol = np.sqrt(np.maximum(sigma2_fn(x), 0.0))
		dw = rng.standard_normal(x.shape)
		x = x + drift_fn(x) * dt + vol[:, None] * sqdt * dw
		bad = ~np.all(np.isfinite(x), axis=1)
		if bad.any():
			raise IntegrationBlowup(int(np.argmax(bad)), k)
		if k % record_every == 0:
			out[:, k // record_every] = x
	times = np.arange(n_rec) * record_every * dt
	return DiffusionPaths(times, out, float(dt))


def default_dt(sigma2_max: float) -> float:
	return 1e-3 * min(1.0, 1.0 / sigma2_max) if sigma2_max > 0 else 1e-3


def simulate_diffusion(model: DiffusionModel,
                       T: float,
                       dt: float | None,
                       n_paths: int,
                       init,
                       rng: np.random.Generator,
                       *,
                       x_grid=None,
                       record_every: int = 1,
                       table: VolatilityTable | None = None) -> DiffusionPaths:
	"""Euler-Maruyama ensemble of the limiting SDE.

	sigma2 and its gradient are tabulated on ``x_grid`` (default
	``[-8, 8]`` in steps of 0.1) before integration. ``init=None`` draws
	the initial states from exp(A).
	"""
	if n_paths < 1:
		raise ValueError("n_paths must be >= 1")
	if table is None:
		grid = np.linspace(-8.0, 8.0, 161) if x_grid is None else x_grid
		table = VolatilityTable.from_model(model, grid)
	if dt is None:
		dt = default_dt(table.sigma2_max)
	if init is None:
		if model.target.marginal_sampler is None:
			raise UnsupportedTargetError("target has no marginal sampler")
		x0 = model.target.marginal_sampler(n_paths, rng)
	else:
		x0 = np.broadcast_to(
		    as_coords(init, model.target.n_x, "init").reshape(-1,
		                                                      model.target.n_x),
		    (n_paths, model.target.n_x))
	logger.debug("Euler-Maruyama: %d paths, T=%g, dt=%g", n_paths, T, dt)
	return euler_maruyama(table.drift_at, table.sigma2_at, x0, T, dt, rng,
	                      record_every)


# ── optimal ell ──────────────────────────────────────────────────────


@dataclass(frozen=True)
class OptimalEll:
	ell: float
	speed: float
	a0: float
	at_boundary: bool
	warnings: tuple[str, ...] = ()


def optimal_ell(model: DiffusionModel, x, ell_grid) -> OptimalEll:
	"""Maximize ``ell^2 a0(x, ell)``: grid search, then golden section.

	A maximum at either end of the grid is returned as is, with a
	boundary warning.
	"""
	grid = np.sort(np.asarray(ell_grid, dtype=float))
	if grid.size < 3:
		raise ValueError("ell_grid needs at least three values")

	def speed(ell: float) -> float:
		return ell**2 * model.a0.estimate(x, ell).value

	speeds = np.array([speed(ell) for ell in grid])
	i = int(np.argmax(speeds))
	if i in (0, grid.size - 1):
		msg = (f"ell^2 a0 is maximal at the grid boundary ell={grid[i]:g} "
		       f"(x={np.ravel(x).tolist()})")
		logger.warning(msg)
		a0 = speeds[i] / grid[i]**2
		return OptimalEll(float(grid[i]), float(speeds[i]), float(a0), True,
		                  (msg,))
	res = minimize_scalar(lambda ell: -speed(ell),
	                      bracket=(grid[i - 1], grid[i], grid[i + 1]),
	                      method="golden",
	                      tol=1e-6)
	ell = float(res.x)
	return OptimalEll(ell, -float(res.fun), float(-res.fun / ell**2), False)


@dataclass(frozen=True)
class EllProfile:
	"""Pointwise optimal ell tabulated along a 1-d x grid."""

	x_grid: np.ndarray
	ell_star: np.ndarray
	speed: np.ndarray
	boundary: np.ndarray

	def as_rule(self,
	            step_mode: StepMode = StepMode.EPSILON_SCALED,
	            ell_min: float = 1e-3,
	            ell_max: float = 1e3) -> ProposalRule:
		interp = InterpolatedEll(self.x_grid, self.ell_star)
		return ProposalRule(step_mode=step_mode,
		                    ell=interp,
		                    ell_min=ell_min,
		                    ell_max=ell_max,
		                    grad_ell=interp.gradient)


def optimal_ell_profile(model: DiffusionModel, x_grid, ell_grid) -> EllProfile:
	"""Tabulate the optimal ell over ``x_grid`` (n_x == 1)."""
	if model.target.n_x != 1:
		raise DimensionError("optimal ell profiles need n_x == 1")
	xg = np.asarray(x_grid, dtype=float)
	results = [optimal_ell(model, [x], ell_grid) for x in xg]
	return EllProfile(xg, np.array([r.ell for r in results]),
	                  np.array([r.speed for r in results]),
	                  np.array([r.at_boundary for r in results]))


@dataclass(frozen=True)
class SpeedGain:
	profile_speed: float
	best_constant_ell: float
	constant_speed: float

	@property
	def gain(self) -> float:
		return self.profile_speed / self.constant_speed


def speed_gain(model: DiffusionModel, profile: EllProfile,
               ell_grid=None) -> SpeedGain:
	"""Stationary mean speed E[sigma2(X)] under the profile vs constant ell.

	The expectation over X ~ exp(A) uses Simpson weights on the profile's
	x grid.
	"""
	xg = profile.x_grid
	w = np.exp(model.target.A(xg[:, None]))
	w = w / simpson(w, x=xg)
	grid = profile.ell_star if ell_grid is None else np.asarray(ell_grid)
	constant = []
	for ell in np.unique(grid):
		vals = [ell**2 * model.a0.estimate([x], ell).value for x in xg]
		constant.append((simpson(w * np.array(vals), x=xg), float(ell)))
	best_speed, best_ell = max(constant)
	return SpeedGain(float(simpson(w * profile.speed, x=xg)), best_ell,
	                 float(best_speed))


# ── generators ───────────────────────────────────────────────────────


def _ell_and_grad(ell, x: np.ndarray) -> tuple[float, np.ndarray]:
	if isinstance(ell, ProposalRule):
		return float(ell.ell_at(x)), ell.ell_gradient(x)
	return float(ell), np.zeros_like(x)


def limit_operator_A_phi(target: MultiscaleTarget,
                         phi: TestFunction,
                         x,
                         u,
                         ell: float | ProposalRule,
                         F: AcceptFunction,
                         n_mc: int,
                         rng: np.random.Generator,
                         *,
                         allow_nonsmooth: bool = False) -> float:
	"""Monte Carlo estimate of the limit operator applied to phi at (x, u).

	With ``DB = B(x, u + ell Z) - B(x, u)``::

	    ell^2 E[F'(DB) <grad A(x) + grad_x B(x, u + ell Z), grad phi>]
	    + 1/2 <grad ell^2, grad phi> E[F'(DB) (2 + |Z|^2 - n_y)]
	    + ell^2 / 2 E[F(DB)] lap phi

	The middle term vanishes for constant ell. The Gaussian draws are the
	first ``n_mc * n_y`` normals of ``rng``.

	Raises:
		NonDifferentiableError: For a non-smooth F unless
			``allow_nonsmooth`` is set (F' is then taken almost everywhere).
	"""
	if not F.smooth and not allow_nonsmooth:
		raise NonDifferentiableError(
		    f"the limit operator needs a smooth accept function, got {F.name}")
	xa = as_coords(x, target.n_x, "x").reshape(target.n_x)
	ua = as_coords(u, target.n_y, "u").reshape(target.n_y)
	l, grad_l = _ell_and_grad(ell, xa)
	z = rng.standard_normal((n_mc, target.n_y))
	up = ua + l * z
	db = target.B(xa, up) - target.B(xa, ua)
	fp = np.asarray(derivative(F, db, almost_everywhere=True))
	gphi = phi.grad(xa)
	g = target.grad_A(xa) + target.grad_x_B(xa, up)
	first = l**2 * np.mean(fp * (g @ gphi))
	hastings = 0.0
	if np.any(grad_l):
		weight = 2.0 + np.sum(z**2, axis=-1) - target.n_y
		hastings = l * float(grad_l @ gphi) * np.mean(fp * weight)
	third = 0.5 * l**2 * np.mean(F.evaluate_fn(db)) * float(phi.laplacian(xa))
	return float(first + hastings + third)


def one_step_generator(target: MultiscaleTarget,
                       epsilon: float,
                       phi: TestFunction,
                       x,
                       u,
                       ell: float | ProposalRule,
                       F: AcceptFunction,
                       n_mc: int,
                       rng: np.random.Generator,
                       n_gh: int = 48) -> float:
	"""``E[phi(X_1) - phi(x)] / eps^2`` for one step with h = eps.

	Z_x is integrated by a Gauss-Hermite tensor rule with ``n_gh`` nodes
	per dimension and Z_y by Monte Carlo. Z_y uses the first
	``n_mc * n_y`` normals of ``rng``, so sharing a seed with
	``limit_operator_A_phi`` gives common random numbers.
	"""
	if epsilon <= 0:
		raise ValueError("epsilon must be > 0")
	xa = as_coords(x, target.n_x, "x").reshape(target.n_x)
	ua = as_coords(u, target.n_y, "u").reshape(target.n_y)
	base = ell if isinstance(ell, ProposalRule) else ProposalRule(ell=ell)
	rule = replace(base, step_mode=StepMode.EPSILON_SCALED)
	l = float(rule.ell_at(xa))
	zy = rng.standard_normal((n_mc, target.n_y))
	zx, w = gauss_hermite_tensor(n_gh, target.n_x)
	dx = l * epsilon * zx[:, None, :]
	du = np.broadcast_to(l * zy[None, :, :], (zx.shape[0], n_mc, target.n_y))
	xs = np.broadcast_to(xa, dx.shape)
	us = np.broadcast_to(ua, du.shape)
	r = acceptance_log_ratio(target.with_epsilon(epsilon),
	                         xs,
	                         us,
	                         dx,
	                         du,
	                         rule=rule,
	                         epsilon=epsilon)
	moved = phi(xa + dx) - phi(xa)
	per_node = np.mean(moved * F.evaluate_fn(r), axis=1)
	return float(w @ per_node) / epsilon**2


# ── generator identities ─────────────────────────────────────────────


@dataclass(frozen=True)
class IdentityCheck:
	"""Both sides of an averaging identity and their gap."""

	lhs: float
	rhs: float
	gap: float
	tolerance: float

	@property
	def passed(self) -> bool:
		return self.gap <= self.tolerance


def _sigma2_quadrature(target: MultiscaleTarget, F: AcceptFunction,
                       rule: ProposalRule, x: float) -> float:
	l = float(rule.ell_at(np.array([x])))
	return l**2 * a0_quadrature(target, F, [x], l)


def averaging_identity_check(target: MultiscaleTarget,
                             phi: TestFunction,
                             x,
                             ell: float | ProposalRule,
                             F: AcceptFunction,
                             *,
                             tolerance: float = 1e-2,
                             fd_step: float = 1e-4) -> IdentityCheck:
	"""Compare the u-average of the limit operator with the SDE generator.

	``lhs`` integrates the limit operator against exp(B(x, .)) by
	quadrature (Simpson in u, Gauss-Hermite or Simpson in Z).
	``rhs = 1/2 sigma2 lap phi + 1/2 <grad sigma2 + sigma2 grad A,
	grad phi>`` with sigma2 from the same quadrature and its gradient by
	central differences. One-dimensional builtins only.
	"""
	if target.n_x != 1 or target.n_y != 1:
		raise DimensionError("identity checks need n_x == n_y == 1")
	xa = as_coords(x, 1, "x").reshape(1)
	rule = ell if isinstance(ell, ProposalRule) else ProposalRule(ell=ell)
	l = float(rule.ell_at(xa))
	dl = float(rule.ell_gradient(xa)[0])
	dphi = float(phi.grad(xa)[0])
	lap = float(phi.laplacian(xa))
	grad_a = float(target.grad_A(xa)[0])

	def integrand(U, Z, db):
		fp = np.asarray(derivative(F, db, almost_everywhere=True))
		dxb = target.grad_x_B(xa, (U + l * Z)[..., None])[..., 0]
		val = l**2 * fp * (grad_a + dxb) * dphi
		val = val + l * dl * dphi * fp * (1.0 + Z**2)
		return val + 0.5 * l**2 * F.evaluate_fn(db) * lap

	lhs = conditional_expectation(target, xa, l, integrand, smooth=F.smooth)
	x0 = float(xa[0])
	s2 = _sigma2_quadrature(target, F, rule, x0)
	ds2 = (_sigma2_quadrature(target, F, rule, x0 + fd_step) -
	       _sigma2_quadrature(target, F, rule, x0 - fd_step)) / (2 * fd_step)
	rhs = 0.5 * s2 * lap + 0.5 * (ds2 + s2 * grad_a) * dphi
	return IdentityCheck(lhs, rhs, abs(lhs - rhs), tolerance)


@dataclass(frozen=True)
class HalfIdentities:
	"""``E[F'(DB)]`` vs ``a0 / 2`` and ``E[F'(DB) dB/dx]`` vs ``d a0/dx / 2``."""

	mean_fprime: float
	half_a0: float
	mean_fprime_dxb: float
	half_dx_a0: float

	@property
	def gaps(self) -> tuple[float, float]:
		return (abs(self.mean_fprime - self.half_a0),
		        abs(self.mean_fprime_dxb - self.half_dx_a0))


def half_identities(target: MultiscaleTarget,
                    F: AcceptFunction,
                    x,
                    ell: float,
                    fd_step: float = 1e-4) -> HalfIdentities:
	"""Evaluate both sides of the two half-identities by quadrature.

	Expectations are over u ~ exp(B(x, .)) and Z ~ N(0, 1), with
	``DB = B(x, u + ell Z) - B(x, u)`` and dB/dx taken at ``u + ell Z``.
	"""
	if target.n_x != 1 or target.n_y != 1:
		raise DimensionError("half identities need n_x == n_y == 1")
	xa = as_coords(x, 1, "x").reshape(1)

	def fprime(U, Z, db):
		return np.asarray(derivative(F, db, almost_everywhere=True))

	def fprime_dxb(U, Z, db):
		dxb = target.grad_x_B(xa, (U + ell * Z)[..., None])[..., 0]
		return fprime(U, Z, db) * dxb

	e1 = conditional_expectation(target, xa, ell, fprime, smooth=F.smooth)
	e2 = conditional_expectation(target, xa, ell, fprime_dxb, smooth=F.smooth)
	a0 = a0_quadrature(target, F, xa, ell)
	x0 = float(xa[0])
	da0 = (a0_quadrature(target, F, [x0 + fd_step], ell) -
	       a0_quadrature(target, F, [x0 - fd_step], ell)) / (2 * fd_step)
	return HalfIdentities(e1, 0.5 * a0, e2, 0.5 * da0)


__all__ = [
    "A0Estimator",
    "A0Lattice",
    "A0_METHODS",
    "DiffusionModel",
    "DiffusionPaths",
    "EllProfile",
    "HalfIdentities",
    "IdentityCheck",
    "OptimalEll",
    "SpeedGain",
    "VolatilityTable",
    "averaging_identity_check",
    "default_dt",
    "drift",
    "estimate_a0",
    "euler_maruyama",
    "grad_sigma2",
    "half_identities",
    "limit_operator_A_phi",
    "one_step_generator",
    "optimal_ell",
    "optimal_ell_profile",
    "sigma2",
    "simulate_diffusion",
    "speed_gain",
]
