"""
Experiment orchestration.

Resolves the configuration of a run (catalog defaults, then the
experiment file, then CLI overrides), executes the driver under an
experiment logging scope, evaluates the acceptance checks and writes
the artifacts.
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass
from pathlib import Path

from ridge_lab import __version__
from ridge_lab.errors import ConfigError, ToleranceFailure
from ridge_lab.evals.checks import collect_checks
from ridge_lab.experiments.base import ExperimentContext, ExperimentOutput
from ridge_lab.experiments.diffusion_runs import (run_a0_map,
                                                  run_compare_diffusion,
                                                  run_identity_checks,
                                                  run_limit_diffusion,
                                                  run_optimal_ell)
from ridge_lab.experiments.highdim_runs import run_highdim_0234
from ridge_lab.experiments.jump_runs import run_compare_jump, run_limit_jump
from ridge_lab.experiments.manifold_runs import (run_manifold_circle,
                                                 run_manifold_geom)
from ridge_lab.experiments.registry import default_config, merge_config
from ridge_lab.experiments.sampling import run_sample, run_scaling_study
from ridge_lab.loaders.config_file import read_config_data, validate_config
from ridge_lab.models.check_result import CheckResult
from ridge_lab.models.config import LabSettings
from ridge_lab.models.experiment import ExperimentConfig
from ridge_lab.models.manifest import RunManifest
from ridge_lab.models.run_params import RunParams
from ridge_lab.ui.reporting import save_run
from ridge_lab.utils.logging import experiment_scope, get_logger
from ridge_lab.utils.paths import artifact_dir

logger = get_logger(__name__)

Driver = Callable[[ExperimentContext], ExperimentOutput]

DRIVERS: dict[str, Driver] = {
    "sample": run_sample,
    "a0-map": run_a0_map,
    "limit-diffusion": run_limit_diffusion,
    "limit-jump": run_limit_jump,
    "compare-diffusion": run_compare_diffusion,
    "compare-jump": run_compare_jump,
    "scaling-study": run_scaling_study,
    "optimal-ell": run_optimal_ell,
    "highdim-0234": run_highdim_0234,
    "manifold-geom": run_manifold_geom,
    "manifold-circle": run_manifold_circle,
    "identity-checks": run_identity_checks,
}


@dataclass(frozen=True)
class RunOutcome:
	"""What one run produced."""

	config: ExperimentConfig
	output_dir: Path
	output: ExperimentOutput
	result: CheckResult
	manifest: RunManifest


def resolve_config(params: RunParams) -> ExperimentConfig:
	"""
	Build the validated config for ``params``.

	The experiment file is deep-merged over the catalog defaults (the
	file wins); ``--seed`` overrides both.

	Raises:
		ConfigError: If the file names a different experiment or fails
			validation.
	"""
	data = default_config(params.experiment, params.full_scale)
	if params.config_path is not None:
		file_data = read_config_data(params.config_path)
		named = file_data.get("experiment", params.experiment)
		if named != params.experiment:
			raise ConfigError(
			    f"file is for {named!r}, not {params.experiment!r}",
			    "experiment")
		data = merge_config(data, file_data)
	if params.seed is not None:
		data["seed"] = params.seed
	return validate_config(data)


def run_experiment(params: RunParams,
                   settings: LabSettings | None = None) -> RunOutcome:
	"""
	Run one experiment end to end.

	Parameters:
		params: Validated CLI arguments.
		settings: Process settings; read from the environment if None.

	Returns:
		The resolved config, artifact directory, driver output, checks
		and manifest.

	Raises:
		ConfigError: For invalid configuration, including argument
			errors raised by the numerical core.
		NumericalFailure: When a simulation breaks down.
		ToleranceFailure: In check mode, when an error-severity check
			fails. Artifacts are written first.
	"""
	settings = settings or LabSettings()
	config = resolve_config(params)
	out_root = params.output_dir or config.output_dir or settings.output_dir
	parallelism = (params.parallelism or config.parallelism or
	               settings.parallelism)
	ctx = ExperimentContext(config, parallelism, settings.chain_block)
	out_dir = artifact_dir(out_root, config.experiment)
	driver = DRIVERS[config.experiment]
	logger.info("running %s (seed=%d, parallelism=%d)", config.experiment,
	            config.seed, parallelism)
	with experiment_scope(config.experiment):
		try:
			output = driver(ctx)
		except ConfigError:
			raise
		# argument errors from the core trace back to config values
		except ValueError as exc:
			raise ConfigError(str(exc)) from exc
		result = collect_checks(config.experiment, output.checks)
		for name in result.failed:
			logger.warning("check failed: %s", name)
		manifest = save_run(out_dir, config, output, result, __version__)
	if params.check and not result.passed:
		raise ToleranceFailure(result.failed)
	return RunOutcome(config, out_dir, output, result, manifest)


__all__ = ["DRIVERS", "RunOutcome", "resolve_config", "run_experiment"]
