import numpy as np
import pytest

from ridge_lab.core.accept import BARKER
from ridge_lab.core.parallel import (chain_blocks, gather_blocks, run_blocks,
                                     run_ensemble_blocks)
from ridge_lab.core.rwm import ProposalRule
from ridge_lab.core.targets import curved_ridge
from ridge_lab.utils.rng import chain_streams, stream, tag_key


def test_chain_blocks():
	assert chain_blocks(5, 2) == [range(0, 2), range(2, 4), range(4, 5)]
	assert chain_blocks(0, 3) == []
	with pytest.raises(ValueError):
		chain_blocks(4, 0)


@pytest.mark.asyncio
async def test_gather_blocks_preserves_order():
	results = await gather_blocks([lambda i=i: i * i for i in range(6)], 2)
	assert results == [0, 1, 4, 9, 16, 25]


@pytest.mark.asyncio
async def test_gather_blocks_raises_first_failure():

	def boom(msg):
		raise RuntimeError(msg)

	tasks = [lambda: 1, lambda: boom("first"), lambda: boom("second")]
	with pytest.raises(RuntimeError, match="first"):
		await gather_blocks(tasks, 3)


@pytest.mark.asyncio
async def test_gather_blocks_rejects_zero_parallelism():
	with pytest.raises(ValueError):
		await gather_blocks([lambda: 1], 0)


def test_run_blocks_sequential_path():
	assert run_blocks([lambda: "a", lambda: "b"], 1) == ["a", "b"]


def test_ensemble_independent_of_blocking():
	t = curved_ridge(0.1)
	rule = ProposalRule(ell=1.0)
	x0 = np.zeros((10, 1))
	u0 = np.zeros((10, 1))

	def run(block, parallelism):
		return run_ensemble_blocks(t,
		                           rule,
		                           BARKER,
		                           200,
		                           x0,
		                           u0,
		                           seed=17,
		                           tag="blocks",
		                           block=block,
		                           parallelism=parallelism)

	one = run(10, 1)
	split = run(3, 4)
	assert np.array_equal(one.x, split.x)
	assert np.array_equal(one.n_accepted, split.n_accepted)


def test_streams_are_reproducible_and_distinct():
	a = stream(5, "chains", 0).standard_normal(4)
	b = stream(5, "chains", 0).standard_normal(4)
	c = stream(5, "chains", 1).standard_normal(4)
	assert np.array_equal(a, b)
	assert not np.array_equal(a, c)
	assert len(chain_streams(5, "chains", range(3))) == 3


def test_tag_key():
	assert tag_key(7) == 7
	assert tag_key("a0") == tag_key("a0")
	with pytest.raises(ValueError):
		tag_key(-1)
	with pytest.raises(ValueError):
		stream(-1)
