from __future__ import annotations

import json
import sys
from pathlib import Path

import typer
from typer.main import get_command

from ridge_lab.errors import (ConfigError, NumericalFailure,
                              ToleranceFailure)
from ridge_lab.experiments.registry import default_config, merge_config
from ridge_lab.experiments.runner import run_experiment
from ridge_lab.loaders.config_file import read_config_data, validate_config
from ridge_lab.models.config import LabSettings, load_env
from ridge_lab.models.experiment import ExperimentConfig
from ridge_lab.models.run_params import RunParams
from ridge_lab.ui.console import print_catalog, print_run_summary
from ridge_lab.utils.logging import configure_logging, get_logger

logger = get_logger(__name__)

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_TOLERANCE = 4

cli = typer.Typer(add_completion=False, no_args_is_help=True)


@cli.callback()
def root() -> None:
	"""Experiments on RWM over ridged two-scale densities."""


def _fail(message: str, code: int) -> typer.Exit:
	typer.echo(f"error: {message}", err=True)
	return typer.Exit(code)


def run_impl(
    experiment: str,
    config_path: Path | None = None,
    seed: int | None = None,
    output_dir: str | None = None,
    parallelism: int | None = None,
    log_level: str | None = None,
    check: bool = False,
    full_scale: bool = False,
) -> None:
	"""
	Run one experiment and print its checks.

	Parameters:
		experiment: Experiment id from the catalog.
		config_path: Optional JSON or YAML experiment file.
		seed: Override for the master seed.
		output_dir: Override for the artifact base directory.
		parallelism: Override for concurrent chain blocks.
		log_level: Override for the root log level.
		check: Exit with code 4 when an acceptance check fails.
		full_scale: Use the full protocol sample sizes.

	Raises:
		typer.Exit: With code 2 for configuration errors, 3 for numerical
			failures and 4 for failed checks in check mode.
	"""
	load_env()
	try:
		params = RunParams(
		    experiment=experiment,
		    config_path=config_path,
		    seed=seed,
		    output_dir=output_dir,
		    parallelism=parallelism,
		    log_level=log_level,
		    check=check,
		    full_scale=full_scale,
		)
		settings = LabSettings()
	except ValueError as exc:
		raise _fail(str(exc), EXIT_CONFIG) from exc
	settings.apply_overrides(params)
	configure_logging(settings.log_level)
	typer.echo(f"Running {params.experiment} "
	           f"(config={params.config_path or 'defaults'}, "
	           f"full_scale={params.full_scale}, check={params.check})")
	try:
		outcome = run_experiment(params, settings)
	except ConfigError as exc:
		raise _fail(str(exc), EXIT_CONFIG) from exc
	except NumericalFailure as exc:
		raise _fail(str(exc), EXIT_NUMERICAL) from exc
	except ToleranceFailure as exc:
		raise _fail(str(exc), EXIT_TOLERANCE) from exc
	print_run_summary(outcome.result, outcome.output_dir,
	                  outcome.output.warnings, outcome.output.tags)


@cli.command()
def run(
    experiment: str,
    config_path: Path | None = typer.Option(
        None, "--config", help="JSON or YAML experiment file"),
    seed: int | None = typer.Option(None, "--seed", help="Override seed"),
    output_dir: str | None = typer.Option(
        None, "--output-dir", help="Override artifact base directory"),
    parallelism: int | None = typer.Option(
        None, "--parallelism", help="Override concurrent chain blocks"),
    log_level: str | None = typer.Option(None, "--log-level",
                                         help="Root log level"),
    check: bool = typer.Option(
        False, "--check/--no-check",
        help="Exit non-zero when an acceptance check fails"),
    full_scale: bool = typer.Option(
        False, "--full-scale/--desk-scale",
        help="Use the full protocol sample sizes"),
) -> None:
	"""
	Run one experiment and write its artifacts.
	"""
	run_impl(experiment, config_path, seed, output_dir, parallelism,
	         log_level, check, full_scale)


@cli.command("list-experiments")
def list_experiments() -> None:
	"""List the experiment catalog."""
	print_catalog()


@cli.command()
def schema() -> None:
	"""Print the JSON schema of experiment files."""
	typer.echo(json.dumps(ExperimentConfig.model_json_schema(), indent=2))


@cli.command()
def validate(config_path: Path) -> None:
	"""Validate an experiment file and print it merged over its defaults."""
	try:
		data = read_config_data(config_path)
		experiment = data.get("experiment")
		if experiment is None:
			raise ConfigError("missing experiment id", "experiment")
		try:
			merged = merge_config(default_config(str(experiment)), data)
		except ValueError as exc:
			raise ConfigError(str(exc), "experiment") from exc
		config = validate_config(merged)
	except ConfigError as exc:
		raise _fail(str(exc), EXIT_CONFIG) from exc
	typer.echo(config.model_dump_json(indent=2))


def entrypoint(argv: list[str] | None = None,
               *,
               standalone_mode: bool = True) -> int | None:
	"""
	Console-script entry; a bare experiment id means ``run <id>``.

	Parameters:
		argv: Arguments without the program name; ``sys.argv[1:]`` if None.
		standalone_mode: Passed to Click. When False, exit codes from
			``typer.Exit`` are returned instead of calling ``sys.exit``.

	Returns:
		The exit code in non-standalone mode, else None.
	"""
	args = sys.argv[1:] if argv is None else list(argv)
	app = get_command(cli)
	known = getattr(app, "commands", {})
	if args and not args[0].startswith("-") and args[0] not in known:
		args.insert(0, "run")
	return app.main(args=args,
	                prog_name="ridge-lab",
	                standalone_mode=standalone_mode)


if __name__ == "__main__":
	entrypoint()
