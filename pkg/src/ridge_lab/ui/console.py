"""
Rich console output for the CLI.

Renders the experiment catalog and the acceptance checks of a run.
"""

from __future__ import annotations

from pathlib import Path

from rich import box
from rich.console import Console
from rich.table import Table
from rich.text import Text

from ridge_lab.experiments.registry import CATALOG
from ridge_lab.models.check_result import CheckResult

_SEVERITY_STYLE = {"error": "red", "warning": "yellow", "info": "dim"}


def catalog_table() -> Table:
	"""One row per experiment: id, claim and gates."""
	table = Table(title="Experiments", box=box.SIMPLE_HEAVY)
	table.add_column("id", style="bold cyan", no_wrap=True)
	table.add_column("claim")
	table.add_column("gates", style="magenta")
	for info in CATALOG.values():
		label = Text(info.id)
		if info.conjecture:
			label.append(" [CONJECTURE]", style="yellow")
		table.add_row(label, info.claim, ", ".join(info.gates))
	return table


def checks_table(result: CheckResult) -> Table:
	table = Table(title=f"Checks: {result.experiment}", box=box.SIMPLE_HEAVY)
	table.add_column("check", no_wrap=True)
	table.add_column("status")
	table.add_column("value", justify="right")
	table.add_column("expected")
	table.add_column("note")
	for rec in result.checks:
		if rec.passed:
			status = Text("pass", style="green")
		else:
			status = Text("fail",
			              style=_SEVERITY_STYLE.get(rec.severity, "red"))
		if rec.severity != "error":
			status.append(f" ({rec.severity})", style="dim")
		value = "" if rec.value is None else f"{rec.value:.6g}"
		table.add_row(rec.name, status, value, rec.expected or "",
		              rec.message or "")
	return table


def print_catalog(console: Console | None = None) -> None:
	(console or Console()).print(catalog_table())


def print_run_summary(result: CheckResult,
                      out_dir: Path,
                      warnings: list[str],
                      tags: list[str],
                      console: Console | None = None) -> None:
	"""Checks table, warnings and the artifact location."""
	console = console or Console()
	console.print(checks_table(result))
	for msg in warnings:
		console.print(f"[yellow]warning:[/yellow] {msg}")
	if tags:
		console.print(f"[yellow]tags:[/yellow] {', '.join(tags)}")
	verdict = "[green]PASS[/green]" if result.passed else "[red]FAIL[/red]"
	console.print(f"{verdict}  artifacts: {out_dir}")


__all__ = [
    "catalog_table",
    "checks_table",
    "print_catalog",
    "print_run_summary",
]
