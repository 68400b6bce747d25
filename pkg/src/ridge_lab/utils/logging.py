"""
Logging configuration module.

Provides centralized logging setup with configurable log levels,
consistent formatting, and an experiment tag on every record emitted
while an experiment is running.
"""

from __future__ import annotations

import contextlib
import contextvars
import logging
from collections.abc import Iterator

LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"

_current_experiment: contextvars.ContextVar[str | None] = contextvars.ContextVar(
    "ridge_lab_experiment", default=None)


class ExperimentContextFilter(logging.Filter):
	"""Prefix log messages with the active experiment id.

	Installed on the root handlers. ``asyncio.to_thread`` copies the context,
	so records from chain-block workers carry the tag too.
	"""

	def filter(self, record: logging.LogRecord) -> bool:
		"""Tag the record message when an experiment is active."""
		name = _current_experiment.get()
		if name and isinstance(record.msg, str) and not record.msg.startswith(
		    "["):
			record.msg = f"[{name}] {record.msg}"
		return True


@contextlib.contextmanager
def experiment_scope(name: str) -> Iterator[None]:
	"""Tag log records with ``name`` for the duration of the block."""
	token = _current_experiment.set(name)
	try:
		yield
	finally:
		_current_experiment.reset(token)


def current_experiment() -> str | None:
	"""Return the experiment id of the enclosing scope, if any."""
	return _current_experiment.get()


def configure_logging(level: str = "info") -> None:
	"""
	Configure basic logging with level, format, and experiment tagging.

	Parameters:
		level: Log level string (e.g., "info", "debug", "warning").
	"""
	lvl = logging._nameToLevel.get(level.upper(), logging.INFO)
	logging.basicConfig(level=lvl, format=LOG_FORMAT)
	root = logging.getLogger()
	root.setLevel(lvl)
	# Handler filters also see records propagated from module loggers;
	# avoid adding duplicates on repeated calls
	for handler in root.handlers:
		if not any(
		    isinstance(f, ExperimentContextFilter) for f in handler.filters):
			handler.addFilter(ExperimentContextFilter())


def get_logger(name: str) -> logging.Logger:
	"""
	Get a logger for the specified module.

	Parameters:
		name: The logger name, typically __name__.

	Returns:
		Configured logger instance.
	"""
	return logging.getLogger(name)


__all__ = [
    "configure_logging",
    "current_experiment",
    "experiment_scope",
    "get_logger",
    "ExperimentContextFilter",
    "LOG_FORMAT",
]
