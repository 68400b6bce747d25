"""
Jump-process limit for unit-size proposals.

With h = 1 the u-increment ell Z_y / eps is huge and moves are accepted
with probability O(eps^n_y). Accelerated by eps^-n_y, the chain
converges to a Markov jump process: from (x, u) it waits an exponential
time with rate r(x, u) and then jumps according to the kernel
K = Q / r, where

    Q(x, u, xb, ub) = F(A(xb) - A(x) + B(xb, ub) - B(x, u))
                      * exp(-|xb - x|^2 / (2 ell^2)) / (2 pi ell^2)^(n/2)

with ``n = n_x + n_y``.

Rates and jumps use importance sampling with proposal
``xb ~ N(x, ell^2 I)``, ``ub ~ exp(B(xb, .))``. The weights
``F(Delta) exp(-B(xb, ub)) / (2 pi ell^2)^(n_y/2)`` are bounded because
F(r) <= e^r. Next states come from self-normalized resampling of a
batch, which carries an O(1 / kernel_batch) bias.
"""

from __future__ import annotations

from collections.abc import Callable, Sequence
from dataclasses import dataclass

import numpy as np
from scipy.integrate import cumulative_trapezoid, simpson

from ridge_lab.core.accept import AcceptFunction
from ridge_lab.core.diagnostics import (Estimate, ScalingRow, ScalingTable,
                                        ScalingFit, iact, mean_se)
from ridge_lab.core.parallel import run_ensemble_blocks
from ridge_lab.core.rwm import ProposalRule, StepMode
from ridge_lab.core.targets import (MultiscaleTarget, as_coords,
                                    sample_stationary)
from ridge_lab.errors import (DimensionError, ResamplingFailure,
                              UnsupportedTargetError)
from ridge_lab.utils.logging import get_logger
from ridge_lab.utils.rng import stream

logger = get_logger(__name__)

ESS_WARNING_FRACTION = 0.05
PRELIMIT_CHUNK = 4096


@dataclass(frozen=True)
class JumpModel:
	"""Limit jump process of the unit-step chain."""

	target: MultiscaleTarget
	ell: float
	accept: AcceptFunction
	rate_mc: int = 20_000
	kernel_batch: int = 4096
	max_retries: int = 3

	def __post_init__(self) -> None:
		if not self.ell > 0:
			raise ValueError("ell must be > 0")
		if self.rate_mc < 2 or self.kernel_batch < 1:
			raise ValueError("rate_mc and kernel_batch must be positive")
		if self.target.conditional_sampler is None:
			raise UnsupportedTargetError(
			    f"target {self.target.name!r} has no exact conditional sampler")

	@property
	def u_normalizer(self) -> float:
		"""(2 pi ell^2)^(n_y / 2)."""
		return float((2.0 * np.pi * self.ell**2)**(self.target.n_y / 2.0))


def _state(jm: JumpModel, x, u) -> tuple[np.ndarray, np.ndarray]:
	t = jm.target
	return (as_coords(x, t.n_x, "x").reshape(t.n_x),
	        as_coords(u, t.n_y, "u").reshape(t.n_y))


def q_density(jm: JumpModel, x, u, x_bar, u_bar):
	"""Jump density Q from (x, u) to (x_bar, u_bar)."""
	t = jm.target
	xa = as_coords(x, t.n_x, "x")
	ua = as_coords(u, t.n_y, "u")
	xb = as_coords(x_bar, t.n_x, "x_bar")
	ub = as_coords(u_bar, t.n_y, "u_bar")
	delta = t.A(xb) - t.A(xa) + t.B(xb, ub) - t.B(xa, ua)
	n = t.n_x + t.n_y
	gauss = np.exp(-np.sum((xb - xa)**2, axis=-1) / (2.0 * jm.ell**2))
	q = (jm.accept.evaluate_fn(delta) * gauss /
	     (2.0 * np.pi * jm.ell**2)**(n / 2.0))
	return float(q) if np.ndim(q) == 0 else q


def _proposal_batch(jm: JumpModel, x: np.ndarray, u: np.ndarray, size: int,
                    rng: np.random.Generator):
	"""Draw ``size`` proposals and their importance weights."""
	t = jm.target
	xb = x + jm.ell * rng.standard_normal((size, t.n_x))
	ub = t.conditional_sampler(xb, rng)
	b_bar = t.B(xb, ub)
	delta = t.A(xb) - t.A(x) + b_bar - t.B(x, u)
	w = jm.accept.evaluate_fn(delta) * np.exp(-b_bar) / jm.u_normalizer
	return xb, ub, w


def rate_bound(jm: JumpModel, x, u) -> float:
	"""Upper bound on r(x, u) from F(r) <= e^r."""
	xa, ua = _state(jm, x, u)
	t = jm.target
	return float(np.exp(-t.A(xa) - t.B(xa, ua)) / jm.u_normalizer)


def jump_rate(jm: JumpModel, x, u, rng: np.random.Generator) -> Estimate:
	"""Importance-sampling estimate of r(x, u) with its standard error.

	A warning is attached when the effective sample size falls below 5%
	of ``rate_mc``.
	"""
	xa, ua = _state(jm, x, u)
	_, _, w = _proposal_batch(jm, xa, ua, jm.rate_mc, rng)
	est = mean_se(w)
	total = float(np.sum(w))
	ess = total**2 / float(np.sum(w**2)) if total > 0 else 0.0
	if ess < ESS_WARNING_FRACTION * jm.rate_mc:
		msg = (f"importance sampling degenerate at x={xa.tolist()}: "
		       f"ESS {ess:.0f} of {jm.rate_mc}")
		logger.warning(msg)
		return Estimate(est.value, est.se, (msg,))
	return est


@dataclass(frozen=True)
class JumpEvent:
	holding_time: float
	x: np.ndarray
	u: np.ndarray


def sample_next_jump(jm: JumpModel,
                     x,
                     u,
                     rng: np.random.Generator,
                     rate: float | None = None) -> JumpEvent:
	"""Holding time and destination of the next jump from (x, u).

	The rate is estimated first when not supplied. The holding time is
	drawn before the resampling batch.

	Raises:
		ResamplingFailure: If every weight is zero after doubling the
			batch ``max_retries`` times.
	"""
	xa, ua = _state(jm, x, u)
	if rate is None:
		rate = jump_rate(jm, xa, ua, rng).value
	if not rate > 0:
		raise ResamplingFailure(f"jump rate is not positive at {xa.tolist()}")
	hold = float(rng.exponential(1.0 / rate))
	size = jm.kernel_batch
	for attempt in range(jm.max_retries + 1):
		xb, ub, w = _proposal_batch(jm, xa, ua, size, rng)
		total = float(np.sum(w))
		if total > 0 and np.isfinite(total):
			k = int(rng.choice(size, p=w / total))
			return JumpEvent(hold, xb[k].copy(), ub[k].copy())
		logger.warning("all resampling weights zero (attempt %d), batch %d",
		               attempt + 1, size)
		size *= 2
	raise ResamplingFailure(
	    f"resampling failed after {jm.max_retries} retries at {xa.tolist()}")


@dataclass(frozen=True)
class JumpPath:
	"""Event list: the state entered at each time in ``times``.

	Row 0 is the initial state at time 0.
	"""

	times: np.ndarray
	x: np.ndarray
	u: np.ndarray
	n_steps: int = 0
	n_accepted: int = 0

	@property
	def n_events(self) -> int:
		return int(self.times.size - 1)

	@property
	def holding_times(self) -> np.ndarray:
		return np.diff(self.times)


def simulate_jump_process(jm: JumpModel, T: float, init,
                          rng: np.random.Generator) -> JumpPath:
	"""Gillespie simulation of the limit process on [0, T]."""
	if not T > 0:
		raise ValueError("T must be > 0")
	x, u = _state(jm, *init)
	times = [0.0]
	xs = [x.copy()]
	us = [u.copy()]
	t = 0.0
	while True:
		rate = jump_rate(jm, x, u, rng).value
		event = sample_next_jump(jm, x, u, rng, rate=rate)
		if t + event.holding_time > T:
			break
		t += event.holding_time
		x, u = event.x, event.u
		times.append(t)
		xs.append(x.copy())
		us.append(u.copy())
	logger.debug("jump process: %d events on [0, %g]", len(times) - 1, T)
	return JumpPath(np.asarray(times), np.asarray(xs), np.asarray(us))


@dataclass(frozen=True)
class PrelimitJump:
	"""First accepted unit step from a fixed state; ``steps`` counts it."""

	steps: int
	x: np.ndarray
	u: np.ndarray


def first_prelimit_jump(target: MultiscaleTarget, epsilon: float, ell: float,
                        F: AcceptFunction, x, u, rng: np.random.Generator,
                        max_steps: int) -> PrelimitJump | None:
	"""Run unit-step proposals from (x, u) until one is accepted.

	While the state is fixed, proposals are i.i.d., so they are drawn in
	chunks of ``PRELIMIT_CHUNK`` (Gaussian block, then uniforms) and the
	rest of the chunk after the first acceptance is discarded. Returns
	None when nothing is accepted within ``max_steps``.
	"""
	t = target
	xa = as_coords(x, t.n_x, "x").reshape(t.n_x)
	ua = as_coords(u, t.n_y, "u").reshape(t.n_y)
	base = t.A(xa) + t.B(xa, ua)
	k = 0
	while k < max_steps:
		c = min(PRELIMIT_CHUNK, max_steps - k)
		z = rng.standard_normal((c, t.n_x + t.n_y))
		xi = rng.random(c)
		dx = ell * z[:, :t.n_x]
		du = ell / epsilon * z[:, t.n_x:]
		r = t.A(xa + dx) + t.B(xa + dx, ua + du) - base
		hits = np.flatnonzero(xi < F.evaluate_fn(r))
		if hits.size:
			j = int(hits[0])
			return PrelimitJump(k + j + 1, xa + dx[j], ua + du[j])
		k += c
	return None


def accelerated_prelimit(target: MultiscaleTarget, epsilon: float, ell: float,
                         F: AcceptFunction, T: float, init,
                         rng: np.random.Generator) -> JumpPath:
	"""Unit-step RWM for ``floor(T eps^-n_y)`` steps as an event list.

	Accepted moves at step k are emitted at time ``k eps^n_y``.
	"""
	if not epsilon > 0 or not T > 0:
		raise ValueError("epsilon and T must be > 0")
	t = target
	x = as_coords(init[0], t.n_x, "x").reshape(t.n_x).copy()
	u = as_coords(init[1], t.n_y, "u").reshape(t.n_y).copy()
	scale = epsilon**t.n_y
	n_steps = int(np.floor(T / scale))
	times = [0.0]
	xs = [x.copy()]
	us = [u.copy()]
	k = 0
	while k < n_steps:
		jump = first_prelimit_jump(t, epsilon, ell, F, x, u, rng, n_steps - k)
		if jump is None:
			break
		k += jump.steps
		x, u = jump.x, jump.u
		times.append(k * scale)
		xs.append(x.copy())
		us.append(u.copy())
	return JumpPath(np.asarray(times), np.asarray(xs), np.asarray(us),
	                n_steps, len(times) - 1)


# ── generators ───────────────────────────────────────────────────────

PhiXU = Callable[[np.ndarray, np.ndarray], np.ndarray]


def jump_generator(jm: JumpModel, phi: PhiXU, x, u, n_mc: int,
                   rng: np.random.Generator) -> Estimate:
	"""Estimate of the limit generator: the Q-integral of phi(xb, ub) - phi(x, u)."""
	xa, ua = _state(jm, x, u)
	xb, ub, w = _proposal_batch(jm, xa, ua, n_mc, rng)
	return mean_se(w * (phi(xb, ub) - phi(xa[None], ua[None])))


def prelimit_jump_generator(target: MultiscaleTarget, epsilon: float,
                            ell: float, F: AcceptFunction, phi: PhiXU, x, u,
                            n_mc: int, rng: np.random.Generator) -> Estimate:
	"""``E[phi(X_1, U_1) - phi(x, u)] / eps^n_y`` for one unit step."""
	t = target
	xa = as_coords(x, t.n_x, "x").reshape(1, t.n_x)
	ua = as_coords(u, t.n_y, "u").reshape(1, t.n_y)
	z = rng.standard_normal((n_mc, t.n_x + t.n_y))
	xp = xa + ell * z[:, :t.n_x]
	up = ua + ell / epsilon * z[:, t.n_x:]
	r = t.A(xp) - t.A(xa) + t.B(xp, up) - t.B(xa, ua)
	vals = F.evaluate_fn(r) * (phi(xp, up) - phi(xa, ua))
	est = mean_se(vals)
	scale = epsilon**t.n_y
	return Estimate(est.value / scale, est.se / scale)


# ── quadrature references ────────────────────────────────────────────


def _jump_grid(jm: JumpModel, x: np.ndarray, n_nodes: int):
	t = jm.target
	if t.n_x != 1 or t.n_y != 1:
		raise DimensionError("jump quadrature needs n_x == n_y == 1")
	if t.conditional_scale is None:
		raise UnsupportedTargetError("target has no conditional scale")
	n_nodes = n_nodes if n_nodes % 2 == 1 else n_nodes + 1
	xg = np.linspace(x[0] - 10.0 * jm.ell, x[0] + 10.0 * jm.ell, n_nodes)
	s = float(np.max(t.conditional_scale(xg[:, None])))
	ug = np.linspace(-10.0 * s, 10.0 * s, n_nodes)
	return xg, ug


def _q_on_grid(jm: JumpModel, x, u, n_nodes: int):
	xa, ua = _state(jm, x, u)
	xg, ug = _jump_grid(jm, xa, n_nodes)
	XB, UB = np.meshgrid(xg, ug, indexing="ij")
	q = q_density(jm, xa, ua, XB[..., None], UB[..., None])
	return xg, ug, q


def jump_rate_quadrature(jm: JumpModel, x, u, n_nodes: int = 801) -> float:
	"""r(x, u) by a Simpson grid over (xb, ub) for 1-d builtins."""
	xg, ug, q = _q_on_grid(jm, x, u, n_nodes)
	return float(simpson(simpson(q, x=ug, axis=1), x=xg))


@dataclass(frozen=True)
class KernelMarginal:
	"""Marginal of the jump kernel in xb, on a grid."""

	grid: np.ndarray
	pdf: np.ndarray
	cdf_values: np.ndarray

	def cdf(self, value) -> np.ndarray:
		return np.interp(value, self.grid, self.cdf_values)


def kernel_x_marginal_quadrature(jm: JumpModel,
                                 x,
                                 u,
                                 n_nodes: int = 801) -> KernelMarginal:
	"""x-marginal of K(x, u, .) by quadrature, with its CDF."""
	xg, ug, q = _q_on_grid(jm, x, u, n_nodes)
	marginal = simpson(q, x=ug, axis=1)
	pdf = marginal / simpson(marginal, x=xg)
	cdf = cumulative_trapezoid(pdf, xg, initial=0.0)
	return KernelMarginal(xg, pdf, cdf / cdf[-1])


# ── complexity ───────────────────────────────────────────────────────


@dataclass(frozen=True)
class ComplexityResult:
	table: ScalingTable
	fits: dict[str, ScalingFit]


def complexity_comparison(target: MultiscaleTarget,
                          eps_list: Sequence[float],
                          modes: Sequence[str] = ("unit", "epsilon_scaled"),
                          *,
                          ell: float,
                          F: AcceptFunction,
                          n_chains: int,
                          base_steps: int,
                          seed: int,
                          max_recorded: int = 20_000,
                          block: int = 64,
                          parallelism: int = 1) -> ComplexityResult:
	"""IACT of x_1 for stationary chains across eps and step modes.

	Chains at eps run ``base_steps * (max(eps_list) / eps)^max(2, n_y)``
	steps. States are thinned to at most ``max_recorded`` per chain and
	the IACT is reported in steps. Rows whose IACT window exceeds a tenth
	of the recorded length are flagged.
	"""
	if len(eps_list) < 3:
		raise ValueError("complexity comparison needs at least three eps")
	eps_max = max(eps_list)
	power = max(2, target.n_y)
	table = ScalingTable()
	for mode in modes:
		for eps in sorted(eps_list):
			t = target.with_epsilon(eps)
			n_steps = int(base_steps * (eps_max / eps)**power)
			thinning = max(1, n_steps // max_recorded)
			x0, u0 = sample_stationary(t, n_chains,
			                           stream(seed, "complexity-init", mode))
			ens = run_ensemble_blocks(t,
			                          ProposalRule(step_mode=StepMode(mode),
			                                       ell=ell),
			                          F,
			                          n_steps,
			                          x0,
			                          u0,
			                          seed=seed,
			                          tag=f"complexity-{mode}-{eps:g}",
			                          thinning=thinning,
			                          block=block,
			                          parallelism=parallelism)
			results = [iact(ens.x[i, :, 0]) for i in range(ens.n_chains)]
			taus = np.array([r.tau for r in results]) * thinning
			flagged = not all(r.converged for r in results)
			est = mean_se(taus)
			table.add(ScalingRow(float(eps), mode, est.value, est.se, flagged))
			logger.info("IACT mode=%s eps=%g: %.4g +/- %.2g%s", mode, eps,
			            est.value, est.se, " (flagged)" if flagged else "")
	fits = {mode: table.fit(mode) for mode in modes}
	return ComplexityResult(table, fits)


__all__ = [
    "ComplexityResult",
    "JumpEvent",
    "JumpModel",
    "JumpPath",
    "KernelMarginal",
    "PrelimitJump",
    "accelerated_prelimit",
    "complexity_comparison",
    "first_prelimit_jump",
    "jump_generator",
    "jump_rate",
    "jump_rate_quadrature",
    "kernel_x_marginal_quadrature",
    "prelimit_jump_generator",
    "q_density",
    "rate_bound",
    "sample_next_jump",
    "simulate_jump_process",
]
