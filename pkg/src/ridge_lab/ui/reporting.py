"""
Artifact persistence.

Writes the tables of an experiment as CSV, its summary records as JSON
lines and a manifest with SHA-256 digests of every artifact. Floats are
written with 17 significant digits and nothing time-dependent is
recorded, so a fixed config and seed reproduce the same bytes.
"""

from __future__ import annotations

import csv
import hashlib
import json
import math
from collections.abc import Iterable, Sequence
from pathlib import Path
from typing import Any

import numpy as np

from ridge_lab.experiments.base import ExperimentOutput, Table
from ridge_lab.models.check_result import CheckResult
from ridge_lab.models.experiment import ExperimentConfig
from ridge_lab.models.manifest import ArtifactEntry, RunManifest
from ridge_lab.utils.logging import get_logger
from ridge_lab.utils.paths import ensure_within, safe_name

logger = get_logger(__name__)

SUMMARY_FILE = "summary.jsonl"
MANIFEST_FILE = "manifest.json"


def format_value(value: Any) -> str:
	"""CSV text for one cell: ``.17g`` for floats, ``str`` otherwise."""
	if isinstance(value, (bool, np.bool_)):
		return str(int(value))
	if isinstance(value, (int, np.integer)):
		return str(int(value))
	if isinstance(value, (float, np.floating)):
		return format(float(value), ".17g")
	return str(value)


def _plain(value: Any) -> Any:
	"""JSON-safe copy: numpy scalars unwrapped, non-finite floats as None."""
	if isinstance(value, dict):
		return {str(k): _plain(v) for k, v in value.items()}
	if isinstance(value, (list, tuple, np.ndarray)):
		return [_plain(v) for v in value]
	if isinstance(value, (np.bool_, bool)):
		return bool(value)
	if isinstance(value, np.integer):
		return int(value)
	if isinstance(value, (float, np.floating)):
		v = float(value)
		return v if math.isfinite(v) else None
	return value


def sha256_file(path: Path | str) -> str:
	h = hashlib.sha256()
	with Path(path).open("rb") as fh:
		for chunk in iter(lambda: fh.read(1 << 16), b""):
			h.update(chunk)
	return h.hexdigest()


def write_csv(path: Path | str, header: Sequence[str],
              rows: Iterable[Sequence[Any]]) -> int:
	"""
	Write a CSV table and return the number of data rows.

	Parameters:
		path: Destination file; parent directories are created.
		header: Column names.
		rows: Row tuples matching ``header``.

	Returns:
		Count of rows written.
	"""
	p = Path(path)
	p.parent.mkdir(parents=True, exist_ok=True)
	n = 0
	with p.open("w", newline="", encoding="utf-8") as fh:
		writer = csv.writer(fh, lineterminator="\n")
		writer.writerow(header)
		for row in rows:
			writer.writerow([format_value(v) for v in row])
			n += 1
	return n


def write_jsonl(path: Path | str, records: Iterable[dict[str, Any]]) -> int:
	p = Path(path)
	p.parent.mkdir(parents=True, exist_ok=True)
	n = 0
	with p.open("w", encoding="utf-8") as fh:
		for rec in records:
			fh.write(json.dumps(_plain(rec), sort_keys=True) + "\n")
			n += 1
	return n


def table_path(out_dir: Path, table: Table) -> Path:
	return ensure_within(out_dir, out_dir / f"{safe_name(table.name)}.csv")


def save_run(out_dir: Path | str, config: ExperimentConfig,
             output: ExperimentOutput, result: CheckResult,
             version: str) -> RunManifest:
	"""
	Persist every artifact of one run and its manifest.

	Parameters:
		out_dir: Artifact directory for this experiment.
		config: The resolved configuration.
		output: Tables, summary records and warnings of the run.
		result: Evaluated acceptance checks.
		version: Package version recorded in the manifest.

	Returns:
		The manifest that was written to ``manifest.json``.

	Raises:
		ValueError: If an artifact name would escape ``out_dir``.
	"""
	base = Path(out_dir)
	base.mkdir(parents=True, exist_ok=True)
	entries: list[ArtifactEntry] = []
	for table in output.tables:
		path = table_path(base, table)
		rows = write_csv(path, table.header, table.rows)
		entries.append(ArtifactEntry(name=path.name, sha256=sha256_file(path),
		                             rows=rows))
		logger.debug("wrote %s (%d rows)", path, rows)
	summary = ensure_within(base, base / SUMMARY_FILE)
	rows = write_jsonl(summary, output.summary)
	entries.append(ArtifactEntry(name=SUMMARY_FILE,
	                             sha256=sha256_file(summary),
	                             rows=rows))
	manifest = RunManifest(
	    experiment=config.experiment,
	    version=version,
	    seed=config.seed,
	    config=_plain(config.model_dump(mode="json")),
	    artifacts=entries,
	    checks=result.checks,
	    tags=list(output.tags),
	    warnings=list(output.warnings),
	)
	write_manifest(ensure_within(base, base / MANIFEST_FILE), manifest)
	logger.info("artifacts written to %s", base)
	return manifest


def write_manifest(path: Path | str, manifest: RunManifest) -> None:
	data = _plain(manifest.model_dump(mode="json"))
	Path(path).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n",
	                      encoding="utf-8")


def load_manifest(path: Path | str) -> RunManifest:
	return RunManifest.model_validate_json(
	    Path(path).read_text(encoding="utf-8"))


__all__ = [
    "MANIFEST_FILE",
    "SUMMARY_FILE",
    "format_value",
    "load_manifest",
    "save_run",
    "sha256_file",
    "write_csv",
    "write_jsonl",
    "write_manifest",
]
