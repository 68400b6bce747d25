"""
Deterministic random streams.

Every stream is derived from a master seed and an integer key through
``numpy.random.SeedSequence``. A chain's stream therefore depends only
on ``(master_seed, tag, chain_index)`` and never on how chains are
grouped or scheduled.
"""

from __future__ import annotations

import zlib

import numpy as np


def tag_key(tag: str | int) -> int:
	"""Map a study tag to a stable non-negative integer."""
	if isinstance(tag, int):
		if tag < 0:
			raise ValueError("stream tags must be non-negative")
		return tag
	return zlib.crc32(tag.encode("utf-8"))


def stream(master_seed: int, *key: str | int) -> np.random.Generator:
	"""Return the generator for ``key`` under ``master_seed``.

	Parameters:
		master_seed: Run-level seed from the experiment config.
		key: Sequence of tags and indices, e.g. ``("chains", 3)``.

	Returns:
		A PCG64-backed generator independent of every other key.
	"""
	if master_seed < 0:
		raise ValueError("master_seed must be >= 0")
	seq = np.random.SeedSequence(master_seed,
	                             spawn_key=tuple(tag_key(k) for k in key))
	return np.random.default_rng(seq)


def chain_streams(master_seed: int, tag: str | int,
                  indices: range | list[int]) -> list[np.random.Generator]:
	"""Return one generator per chain index for a study tag."""
	return [stream(master_seed, tag, i) for i in indices]


__all__ = ["chain_streams", "stream", "tag_key"]
