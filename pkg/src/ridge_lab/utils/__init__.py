"""Shared utility functions.

This subpackage has no dependencies on other subpackages.

Key modules:
    - logging: logging configuration and experiment tagging
    - paths: path safety for artifacts
    - rng: deterministic per-chain random streams
"""

from .logging import (
    configure_logging,
    experiment_scope,
    get_logger,
    ExperimentContextFilter,
)
from .paths import artifact_dir, ensure_within, safe_name
from .rng import chain_streams, stream, tag_key

__all__ = [
    # logging
    "configure_logging",
    "experiment_scope",
    "get_logger",
    "ExperimentContextFilter",
    # paths
    "artifact_dir",
    "ensure_within",
    "safe_name",
    # rng
    "chain_streams",
    "stream",
    "tag_key",
]
