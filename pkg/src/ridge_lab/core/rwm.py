"""
Random-Walk Metropolis on two-scale targets.

All chains run in the standardized coordinates ``(x, u)`` with
``u = y / eps``. A proposal moves

    x' = x + ell(x) h(eps) Z_x,    u' = u + ell(x) (h(eps) / eps) Z_y

and is accepted with probability F(r), where r is the log target ratio
plus, for a position-dependent ell, the Gaussian proposal log-ratio.
``acceptance_log_ratio`` receives total increments: ell is applied by
the caller, never inside the ratio.

Noise is drawn per chain in chunks of ``NOISE_CHUNK`` steps: first a
Gaussian block of shape ``(k, n_x + n_y)`` with the Z_x columns first,
then ``k`` uniforms. A chain's path therefore depends only on its own
generator, whichever block of chains it is simulated with.
"""

from __future__ import annotations

from collections.abc import Callable, Iterator, Sequence
from dataclasses import dataclass
from enum import Enum

import numpy as np

from ridge_lab.core.accept import AcceptFunction, evaluate
from ridge_lab.core.targets import MultiscaleTarget, as_coords
from ridge_lab.utils.logging import get_logger

logger = get_logger(__name__)

NOISE_CHUNK = 1024

EllFn = Callable[[np.ndarray], np.ndarray]


class StepMode(str, Enum):
	"""How the proposal scale h depends on eps."""

	EPSILON_SCALED = "epsilon_scaled"
	UNIT = "unit"
	CUSTOM_EXPONENT = "custom_exponent"


@dataclass(frozen=True)
class ProposalRule:
	"""Step-size rule: h(eps) and a constant or position-dependent ell.

	A callable ``ell`` maps ``x`` of shape ``(..., n_x)`` to shape
	``(...)``; its values are clamped to ``[ell_min, ell_max]``.
	``grad_ell`` is optional and falls back to central differences.
	"""

	step_mode: StepMode = StepMode.EPSILON_SCALED
	ell: float | EllFn = 1.0
	kappa: float | None = None
	ell_min: float = 1e-3
	ell_max: float = 1e3
	grad_ell: EllFn | None = None

	def __post_init__(self) -> None:
		object.__setattr__(self, "step_mode", StepMode(self.step_mode))
		if self.step_mode is StepMode.CUSTOM_EXPONENT and self.kappa is None:
			raise ValueError("custom_exponent step mode needs kappa")
		if not 0.0 < self.ell_min <= self.ell_max:
			raise ValueError("ell bounds must satisfy 0 < ell_min <= ell_max")
		if not callable(self.ell) and not (np.isfinite(self.ell) and
		                                   self.ell > 0):
			raise ValueError("ell must be a positive finite number")

	@property
	def position_dependent(self) -> bool:
		return callable(self.ell)

	def step_size(self, epsilon: float) -> float:
		"""h(eps) for this rule."""
		if self.step_mode is StepMode.EPSILON_SCALED:
			return float(epsilon)
		if self.step_mode is StepMode.UNIT:
			return 1.0
		return float(epsilon)**float(self.kappa)

	def ell_at(self, x: np.ndarray) -> np.ndarray:
		"""ell at each point of ``x`` (shape ``(..., n_x)`` to ``(...)``)."""
		x = np.asarray(x, dtype=float)
		if not self.position_dependent:
			return np.full(x.shape[:-1], float(self.ell))
		return np.clip(np.asarray(self.ell(x), dtype=float), self.ell_min,
		               self.ell_max)

	def ell_gradient(self, x: np.ndarray, step: float = 1e-6) -> np.ndarray:
		"""Gradient of ell, shape ``(..., n_x)``."""
		x = np.asarray(x, dtype=float)
		if not self.position_dependent:
			return np.zeros_like(x)
		if self.grad_ell is not None:
			inside = (self.ell(x) > self.ell_min) & (self.ell(x) < self.ell_max)
			return np.where(inside[..., None],
			                np.asarray(self.grad_ell(x), dtype=float), 0.0)
		grads = []
		for i in range(x.shape[-1]):
			e = np.zeros(x.shape[-1])
			e[i] = step
			grads.append((self.ell_at(x + e) - self.ell_at(x - e)) / (2 * step))
		return np.stack(grads, axis=-1)


def tanh_ell(base: float = 1.0,
             amplitude: float = 0.5) -> tuple[EllFn, EllFn]:
	"""The profile ``base + amplitude * tanh(x_1)`` and its gradient."""

	def ell(x: np.ndarray) -> np.ndarray:
		return base + amplitude * np.tanh(x[..., 0])

	def grad(x: np.ndarray) -> np.ndarray:
		g = np.zeros_like(x, dtype=float)
		g[..., 0] = amplitude / np.cosh(x[..., 0])**2
		return g

	return ell, grad


@dataclass(frozen=True)
class InterpolatedEll:
	"""Piecewise-linear ell(x_1) through tabulated ``(x_grid, values)``.

	Constant beyond the ends of the grid.
	"""

	x_grid: np.ndarray
	values: np.ndarray

	def __post_init__(self) -> None:
		xg = np.asarray(self.x_grid, dtype=float)
		vals = np.asarray(self.values, dtype=float)
		if xg.ndim != 1 or xg.shape != vals.shape or xg.size < 2:
			raise ValueError("x_grid and values must be matching 1-d arrays")
		if np.any(np.diff(xg) <= 0):
			raise ValueError("x_grid must be strictly increasing")
		object.__setattr__(self, "x_grid", xg)
		object.__setattr__(self, "values", vals)

	def __call__(self, x: np.ndarray) -> np.ndarray:
		return np.interp(np.asarray(x, dtype=float)[..., 0], self.x_grid,
		                 self.values)

	def gradient(self, x: np.ndarray) -> np.ndarray:
		x = np.asarray(x, dtype=float)
		slopes = np.diff(self.values) / np.diff(self.x_grid)
		idx = np.searchsorted(self.x_grid, x[..., 0], side="right") - 1
		inside = (idx >= 0) & (idx < slopes.size)
		g = np.zeros_like(x)
		g[..., 0] = np.where(inside, slopes[np.clip(idx, 0, slopes.size - 1)],
		                     0.0)
		return g


@dataclass(frozen=True)
class ChainState:
	"""A chain position in standardized coordinates."""

	x: np.ndarray
	u: np.ndarray
	iteration: int = 0
	last_accepted: bool = False


@dataclass(frozen=True)
class Trajectory:
	"""Recorded states of one chain.

	Row ``k`` holds the state after ``iterations[k]`` steps; row 0 is the
	initial state.
	"""

	x: np.ndarray
	u: np.ndarray
	iterations: np.ndarray
	accepted: np.ndarray
	thinning: int
	n_steps: int
	n_accepted: int
	accept_prob_sum: float = 0.0
	seed: int | None = None

	@property
	def acceptance_rate(self) -> float:
		return self.n_accepted / self.n_steps if self.n_steps else float("nan")

	@property
	def mean_accept_prob(self) -> float:
		"""Average of F(r) over proposals; lower variance than the rate."""
		return (self.accept_prob_sum /
		        self.n_steps if self.n_steps else float("nan"))

	@property
	def final_state(self) -> ChainState:
		return ChainState(self.x[-1].copy(), self.u[-1].copy(),
		                  int(self.iterations[-1]), bool(self.accepted[-1]))


@dataclass(frozen=True)
class Ensemble:
	"""Recorded states of many chains; the leading axis indexes chains."""

	x: np.ndarray
	u: np.ndarray
	iterations: np.ndarray
	accepted: np.ndarray
	thinning: int
	n_steps: int
	n_accepted: np.ndarray
	accept_prob_sum: np.ndarray

	@property
	def n_chains(self) -> int:
		return self.x.shape[0]

	@property
	def acceptance_rate(self) -> float:
		"""Pooled acceptance rate."""
		total = self.n_steps * self.n_chains
		return float(self.n_accepted.sum() / total) if total else float("nan")

	def chain(self, index: int) -> Trajectory:
		return Trajectory(self.x[index], self.u[index], self.iterations,
		                  self.accepted[index], self.thinning, self.n_steps,
		                  int(self.n_accepted[index]),
		                  float(self.accept_prob_sum[index]))

	@classmethod
	def concatenate(cls, parts: Sequence[Ensemble]) -> Ensemble:
		"""Join ensembles over chains, in the given order."""
		first = parts[0]
		return cls(
		    x=np.concatenate([p.x for p in parts]),
		    u=np.concatenate([p.u for p in parts]),
		    iterations=first.iterations,
		    accepted=np.concatenate([p.accepted for p in parts]),
		    thinning=first.thinning,
		    n_steps=first.n_steps,
		    n_accepted=np.concatenate([p.n_accepted for p in parts]),
		    accept_prob_sum=np.concatenate([p.accept_prob_sum for p in parts]),
		)


# ── kernel ───────────────────────────────────────────────────────────


def acceptance_log_ratio(target: MultiscaleTarget,
                         x,
                         u,
                         dx,
                         du,
                         *,
                         rule: ProposalRule | None = None,
                         epsilon: float | None = None):
	"""Log acceptance argument for the move ``(x, u) -> (x + dx, u + du)``.

	Returns ``A(x') - A(x) + B(x', u') - B(x, u)``. When ``rule`` has a
	position-dependent ell, the log-ratio of the Gaussian proposal
	densities (covariance ``ell(x)^2 h^2`` per original coordinate) is
	added.
	"""
	x = as_coords(x, target.n_x, "x")
	u = as_coords(u, target.n_y, "u")
	dx = as_coords(dx, target.n_x, "dx")
	du = as_coords(du, target.n_y, "du")
	xp = x + dx
	up = u + du
	r = target.A(xp) - target.A(x) + target.B(xp, up) - target.B(x, u)
	if rule is not None and rule.position_dependent:
		eps = target.epsilon if epsilon is None else float(epsilon)
		h = rule.step_size(eps)
		l0 = rule.ell_at(x)
		l1 = rule.ell_at(xp)
		n = target.n_x + target.n_y
		q2 = (np.sum(dx**2, axis=-1) + eps**2 * np.sum(du**2, axis=-1)) / h**2
		r = r - n * np.log(l1 / l0) - 0.5 * q2 * (1.0 / l1**2 - 1.0 / l0**2)
	return float(r) if np.ndim(r) == 0 else r


def _noise_chunks(rngs: Sequence[np.random.Generator], dim: int,
                  n_steps: int) -> Iterator[tuple[np.ndarray, np.ndarray]]:
	"""Yield ``(Z, xi)`` of shapes ``(m, k, dim)`` and ``(m, k)``."""
	done = 0
	while done < n_steps:
		k = min(NOISE_CHUNK, n_steps - done)
		zs = []
		xis = []
		for rng in rngs:
			zs.append(rng.standard_normal((k, dim)))
			xis.append(rng.random(k))
		yield np.stack(zs), np.stack(xis)
		done += k


def _transition(target: MultiscaleTarget, rule: ProposalRule,
                F: AcceptFunction, x: np.ndarray, u: np.ndarray,
                z: np.ndarray, xi: np.ndarray, epsilon: float, h: float):
	"""One vectorized RWM step for ``m`` chains."""
	ell = rule.ell_at(x)
	dx = (ell * h)[:, None] * z[:, :target.n_x]
	du = (ell * h / epsilon)[:, None] * z[:, target.n_x:]
	r = acceptance_log_ratio(target, x, u, dx, du, rule=rule, epsilon=epsilon)
	prob = np.asarray(evaluate(F, r), dtype=float).reshape(x.shape[0])
	accept = xi < prob
	x = np.where(accept[:, None], x + dx, x)
	u = np.where(accept[:, None], u + du, u)
	return x, u, accept, prob


def step(state: ChainState, target: MultiscaleTarget, rule: ProposalRule,
         F: AcceptFunction, rng: np.random.Generator) -> ChainState:
	"""Advance one chain by one RWM step.

	Consumes one Gaussian vector of length ``n_x + n_y`` and then one
	uniform from ``rng``.
	"""
	x = as_coords(state.x, target.n_x, "x").reshape(1, target.n_x)
	u = as_coords(state.u, target.n_y, "u").reshape(1, target.n_y)
	z = rng.standard_normal(target.n_x + target.n_y)[None, :]
	xi = np.array([rng.random()])
	eps = target.epsilon
	x, u, accept, _ = _transition(target, rule, F, x, u, z, xi, eps,
	                              rule.step_size(eps))
	return ChainState(x[0], u[0], state.iteration + 1, bool(accept[0]))


def run_ensemble(target: MultiscaleTarget,
                 rule: ProposalRule,
                 F: AcceptFunction,
                 n_steps: int,
                 x0,
                 u0,
                 rngs: Sequence[np.random.Generator],
                 thinning: int = 1) -> Ensemble:
	"""Run ``len(rngs)`` independent chains side by side.

	Parameters:
		x0, u0: Initial states, shapes ``(m, n_x)`` and ``(m, n_y)``.
		rngs: One generator per chain.
		thinning: Record every ``thinning``-th state (plus the initial one).

	Returns:
		An Ensemble with ``n_steps // thinning + 1`` recorded rows.
	"""
	if n_steps < 0:
		raise ValueError("n_steps must be >= 0")
	if thinning < 1:
		raise ValueError("thinning must be >= 1")
	m = len(rngs)
	x = as_coords(x0, target.n_x, "x0").reshape(m, target.n_x).copy()
	u = as_coords(u0, target.n_y, "u0").reshape(m, target.n_y).copy()
	n_rec = n_steps // thinning + 1
	xs = np.empty((m, n_rec, target.n_x))
	us = np.empty((m, n_rec, target.n_y))
	acc_rec = np.zeros((m, n_rec), dtype=bool)
	xs[:, 0] = x
	us[:, 0] = u
	n_acc = np.zeros(m, dtype=np.int64)
	prob_sum = np.zeros(m)
	eps = target.epsilon
	h = rule.step_size(eps)
	it = 0
	for z_block, xi_block in _noise_chunks(rngs, target.n_x + target.n_y,
	                                       n_steps):
		for k in range(z_block.shape[1]):
			x, u, accept, prob = _transition(target, rule, F, x, u,
			                                 z_block[:, k], xi_block[:, k], eps,
			                                 h)
			it += 1
			n_acc += accept
			prob_sum += prob
			if it % thinning == 0:
				row = it // thinning
				xs[:, row] = x
				us[:, row] = u
				acc_rec[:, row] = accept
	iterations = np.arange(n_rec, dtype=np.int64) * thinning
	logger.debug("ran %d chains x %d steps (%s, eps=%g)", m, n_steps,
	             target.name, eps)
	return Ensemble(xs, us, iterations, acc_rec, thinning, n_steps, n_acc,
	                prob_sum)


def run_chain(target: MultiscaleTarget,
              rule: ProposalRule,
              F: AcceptFunction,
              n_steps: int,
              init: ChainState | tuple,
              thinning: int,
              rng: np.random.Generator,
              seed: int | None = None) -> Trajectory:
	"""Run a single chain; deterministic given ``rng``'s state."""
	if isinstance(init, ChainState):
		x0, u0 = init.x, init.u
	else:
		x0, u0 = init
	ens = run_ensemble(target, rule, F, n_steps,
	                   np.reshape(np.asarray(x0, dtype=float), (1, -1)),
	                   np.reshape(np.asarray(u0, dtype=float), (1, -1)), [rng],
	                   thinning)
	traj = ens.chain(0)
	return Trajectory(traj.x, traj.u, traj.iterations, traj.accepted,
	                  traj.thinning, traj.n_steps, traj.n_accepted,
	                  traj.accept_prob_sum, seed)


# ── pinned and coupled chains ────────────────────────────────────────


@dataclass(frozen=True)
class PinnedTrajectory:
	"""u-path of the chain with x frozen at ``x0``.

	``accept_probs[j]`` is F evaluated at the j-th proposal, whether or
	not it was accepted.
	"""

	x0: np.ndarray
	u: np.ndarray
	accept_probs: np.ndarray
	n_accepted: int

	@property
	def n_steps(self) -> int:
		return int(self.accept_probs.size)


def run_pinned_ensemble(target: MultiscaleTarget,
                        x0,
                        ell,
                        F: AcceptFunction,
                        n_steps: int,
                        u0,
                        rngs: Sequence[np.random.Generator],
                        thinning: int = 1,
                        record: bool = True):
	"""Vectorized pinned chains, one per generator.

	``x0`` has shape ``(m, n_x)`` and ``ell`` broadcasts to ``(m,)``.

	Returns:
		``(u, accept_probs, n_accepted)`` with ``u`` of shape
		``(m, n_steps // thinning + 1, n_y)`` (None unless ``record``),
		``accept_probs`` of shape ``(m, n_steps)``.
	"""
	if n_steps < 0:
		raise ValueError("n_steps must be >= 0")
	if thinning < 1:
		raise ValueError("thinning must be >= 1")
	m = len(rngs)
	x0 = as_coords(x0, target.n_x, "x0").reshape(m, target.n_x)
	u = as_coords(u0, target.n_y, "u0").reshape(m, target.n_y).copy()
	ell = np.broadcast_to(np.asarray(ell, dtype=float), (m,))[:, None]
	b = target.B(x0, u)
	probs = np.empty((m, n_steps))
	n_acc = np.zeros(m, dtype=np.int64)
	us = None
	if record:
		us = np.empty((m, n_steps // thinning + 1, target.n_y))
		us[:, 0] = u
	j = 0
	for z_block, xi_block in _noise_chunks(rngs, target.n_y, n_steps):
		for k in range(z_block.shape[1]):
			prop = u + ell * z_block[:, k]
			b_new = target.B(x0, prop)
			p = F.evaluate_fn(b_new - b)
			probs[:, j] = p
			accept = xi_block[:, k] < p
			u = np.where(accept[:, None], prop, u)
			b = np.where(accept, b_new, b)
			n_acc += accept
			j += 1
			if record and j % thinning == 0:
				us[:, j // thinning] = u
	return us, probs, n_acc


def run_pinned_chain(target: MultiscaleTarget,
                     x0,
                     ell: float,
                     F: AcceptFunction,
                     n_steps: int,
                     u0,
                     rng: np.random.Generator,
                     thinning: int = 1) -> PinnedTrajectory:
	"""RWM on u alone against exp(B(x0, .)), proposal ``u + ell Z_y``.

	Independent of eps. Each step consumes a Gaussian vector of length
	``n_y`` and then a uniform.
	"""
	x0 = as_coords(x0, target.n_x, "x0").reshape(1, target.n_x)
	us, probs, n_acc = run_pinned_ensemble(target, x0, ell, F, n_steps, u0,
	                                       [rng], thinning)
	return PinnedTrajectory(x0[0], us[0], probs[0], int(n_acc[0]))


@dataclass(frozen=True)
class CoupledRun:
	"""Full and pinned chains driven by common noise.

	``decouple_index`` is the first step (1-based) at which the two
	acceptance indicators differ, or ``n_steps + 1`` if they never do.
	"""

	full_x: np.ndarray
	full_u: np.ndarray
	pinned_u: np.ndarray
	full_accepted: np.ndarray
	pinned_accepted: np.ndarray
	decouple_index: int


def _coupled_core(target: MultiscaleTarget, epsilon: float, ell: float,
                  F: AcceptFunction, n_steps: int, x0: np.ndarray,
                  u0: np.ndarray, rngs: Sequence[np.random.Generator],
                  record: bool):
	m = len(rngs)
	x = x0.copy()
	u = u0.copy()
	us = u0.copy()
	pinned_x = x0.copy()
	decouple = np.full(m, n_steps + 1, dtype=np.int64)
	if record:
		fx = np.empty((m, n_steps + 1, target.n_x))
		fu = np.empty((m, n_steps + 1, target.n_y))
		pu = np.empty((m, n_steps + 1, target.n_y))
		fa = np.zeros((m, n_steps), dtype=bool)
		pa = np.zeros((m, n_steps), dtype=bool)
		fx[:, 0], fu[:, 0], pu[:, 0] = x, u, us
	j = 0
	for z_block, xi_block in _noise_chunks(rngs, target.n_x + target.n_y,
	                                       n_steps):
		for k in range(z_block.shape[1]):
			z = z_block[:, k]
			xi = xi_block[:, k]
			dx = ell * epsilon * z[:, :target.n_x]
			du = ell * z[:, target.n_x:]
			r_full = (target.A(x + dx) - target.A(x) +
			          target.B(x + dx, u + du) - target.B(x, u))
			r_pin = target.B(pinned_x, us + du) - target.B(pinned_x, us)
			acc_full = xi < F.evaluate_fn(r_full)
			acc_pin = xi < F.evaluate_fn(r_pin)
			j += 1
			fresh = (acc_full != acc_pin) & (decouple == n_steps + 1)
			decouple[fresh] = j
			x = np.where(acc_full[:, None], x + dx, x)
			u = np.where(acc_full[:, None], u + du, u)
			us = np.where(acc_pin[:, None], us + du, us)
			if record:
				fx[:, j], fu[:, j], pu[:, j] = x, u, us
				fa[:, j - 1], pa[:, j - 1] = acc_full, acc_pin
	if record:
		return decouple, (fx, fu, pu, fa, pa)
	return decouple, None


def run_coupled_chains(target: MultiscaleTarget, epsilon: float, ell: float,
                       F: AcceptFunction, n_steps: int, init,
                       rng: np.random.Generator) -> CoupledRun:
	"""Run the full chain at ``epsilon`` and the pinned chain on common noise.

	Both chains share Z_y and the uniform; the full chain uses h = eps.
	The pinned chain's acceptance uses the initial x throughout.
	``epsilon`` may be 0, in which case x never moves.
	"""
	if epsilon < 0:
		raise ValueError("epsilon must be >= 0")
	x0, u0 = (init.x, init.u) if isinstance(init, ChainState) else init
	x0 = as_coords(x0, target.n_x, "x0").reshape(1, target.n_x)
	u0 = as_coords(u0, target.n_y, "u0").reshape(1, target.n_y)
	decouple, rec = _coupled_core(target, float(epsilon), float(ell), F,
	                              n_steps, x0, u0, [rng], True)
	fx, fu, pu, fa, pa = rec
	return CoupledRun(fx[0], fu[0], pu[0], fa[0], pa[0], int(decouple[0]))


def run_coupled_replicas(target: MultiscaleTarget, epsilon: float, ell: float,
                         F: AcceptFunction, n_steps: int, x0, u0,
                         rngs: Sequence[np.random.Generator]) -> np.ndarray:
	"""Decoupling indices of ``len(rngs)`` coupled pairs, vectorized."""
	m = len(rngs)
	x0 = as_coords(x0, target.n_x, "x0").reshape(m, target.n_x)
	u0 = as_coords(u0, target.n_y, "u0").reshape(m, target.n_y)
	decouple, _ = _coupled_core(target, float(epsilon), float(ell), F,
	                            n_steps, x0, u0, rngs, False)
	return decouple


__all__ = [
    "ChainState",
    "CoupledRun",
    "Ensemble",
    "InterpolatedEll",
    "NOISE_CHUNK",
    "PinnedTrajectory",
    "ProposalRule",
    "StepMode",
    "Trajectory",
    "acceptance_log_ratio",
    "run_chain",
    "run_coupled_chains",
    "run_coupled_replicas",
    "run_ensemble",
    "run_pinned_chain",
    "run_pinned_ensemble",
    "step",
    "tanh_ell",
]
