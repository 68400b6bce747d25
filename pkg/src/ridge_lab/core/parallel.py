"""
Block-parallel execution of independent chain groups.

Work is split into fixed-size blocks, each block runs in a worker
thread under a semaphore, and results come back in block order. Every
chain draws from its own ``(seed, tag, index)`` stream, so results are
independent of the parallelism degree.
"""

from __future__ import annotations

import asyncio
from collections.abc import Callable, Sequence
from typing import TypeVar

import numpy as np

from ridge_lab.core.accept import AcceptFunction
from ridge_lab.core.rwm import Ensemble, ProposalRule, run_ensemble
from ridge_lab.core.targets import MultiscaleTarget
from ridge_lab.utils.logging import get_logger
from ridge_lab.utils.rng import chain_streams

logger = get_logger(__name__)

T = TypeVar("T")


async def gather_blocks(tasks: Sequence[Callable[[], T]],
                        parallelism: int) -> list[T]:
	"""Run blocking callables concurrently, at most ``parallelism`` at once.

	Raises:
		Exception: The first failure in block order, after every failure
			has been logged.
	"""
	if parallelism < 1:
		raise ValueError("parallelism must be >= 1")
	sem = asyncio.Semaphore(parallelism)

	async def run_one(fn: Callable[[], T]) -> T:
		async with sem:
			return await asyncio.to_thread(fn)

	results = await asyncio.gather(*(run_one(fn) for fn in tasks),
	                               return_exceptions=True)
	failures = [(i, r) for i, r in enumerate(results)
	            if isinstance(r, BaseException)]
	for idx, exc in failures:
		logger.error("block %d failed: %s", idx, exc)
	if failures:
		raise failures[0][1]
	logger.debug("%d blocks completed", len(results))
	return list(results)


def run_blocks(tasks: Sequence[Callable[[], T]], parallelism: int) -> list[T]:
	"""Synchronous wrapper around ``gather_blocks``."""
	if parallelism == 1 or len(tasks) <= 1:
		return [fn() for fn in tasks]
	return asyncio.run(gather_blocks(tasks, parallelism))


def chain_blocks(n_chains: int, block: int) -> list[range]:
	"""Split ``range(n_chains)`` into consecutive ranges of size ``block``."""
	if block < 1:
		raise ValueError("block must be >= 1")
	return [
	    range(start, min(start + block, n_chains))
	    for start in range(0, n_chains, block)
	]


def run_ensemble_blocks(target: MultiscaleTarget,
                        rule: ProposalRule,
                        F: AcceptFunction,
                        n_steps: int,
                        x0: np.ndarray,
                        u0: np.ndarray,
                        *,
                        seed: int,
                        tag: str,
                        thinning: int = 1,
                        block: int = 64,
                        parallelism: int = 1) -> Ensemble:
	"""``run_ensemble`` over blocks of chains with per-chain streams.

	Chain ``i`` uses ``stream(seed, tag, i)``.
	"""
	x0 = np.asarray(x0, dtype=float)
	u0 = np.asarray(u0, dtype=float)

	def make_task(idx: range) -> Callable[[], Ensemble]:

		def task() -> Ensemble:
			return run_ensemble(target, rule, F, n_steps, x0[idx.start:idx.stop],
			                    u0[idx.start:idx.stop],
			                    chain_streams(seed, tag, idx), thinning)

		return task

	tasks = [make_task(r) for r in chain_blocks(x0.shape[0], block)]
	return Ensemble.concatenate(run_blocks(tasks, parallelism))


__all__ = [
    "chain_blocks",
    "gather_blocks",
    "run_blocks",
    "run_ensemble_blocks",
]
