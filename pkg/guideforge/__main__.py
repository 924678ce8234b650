"""
GuideForge CLI - coupled-mode waveguide solver

Usage:
    python -m guideforge run scenario.toml --tier subset_bh --tier reference3d
    python -m guideforge validate scenario.toml
    python -m guideforge list-presets

Exit codes: 0 on success, 2 for configuration errors, 3 for solver or
export failures.
"""

from pathlib import Path
from typing import Optional

import typer
from rich.console import Console
from rich.markup import escape
from rich.panel import Panel

from . import __version__
from .errors import ConfigError, ExportError, SolverError
from .log import setup_logging

EXIT_CONFIG = 2
EXIT_SOLVER = 3

app = typer.Typer(
    name="guideforge",
    help="Coupled-mode solver for curved, twisted and deformed quantum waveguides",
    add_completion=False,
)

console = Console(stderr=True)


def _fail(exc: Exception, code: int) -> None:
    console.print(f"[red]Error:[/red] {escape(str(exc))}")
    raise typer.Exit(code)


def _load(config: Path):
    from .scenarios import load_scenario

    try:
        return load_scenario(config)
    except ConfigError as exc:
        _fail(exc, EXIT_CONFIG)


@app.command()
def run(
    config: Path = typer.Argument(..., help="Scenario TOML file"),
    output_dir: Optional[Path] = typer.Option(
        None,
        "--output-dir", "-o",
        help="Directory for result tables (overrides output.directory)"
    ),
    threads: Optional[int] = typer.Option(
        None,
        "--threads", "-j",
        help="Worker threads for slice solves and couplings"
    ),
    tier: Optional[list[str]] = typer.Option(
        None,
        "--tier", "-t",
        help="Tier to run; repeat for several (overrides solver.tiers)"
    ),
    seed: Optional[int] = typer.Option(
        None,
        "--seed",
        help="Seed for eigensolver starting vectors"
    ),
):
    """
    Run a scenario and export its results.

    Example:
        python -m guideforge run bent.toml --tier single_mode_bh --tier reference3d
    """
    from .evaluation import compare_tiers, export_results, run_scenario

    setup_logging("info", console=console)
    scenario = _load(config)
    try:
        scenario = scenario.with_overrides(threads=threads, seed=seed, tiers=tier or None)
    except ConfigError as exc:
        _fail(exc, EXIT_CONFIG)
    setup_logging(scenario.output.verbosity, console=console)

    console.print(Panel.fit(
        f"[bold blue]GuideForge[/bold blue] {__version__} - {escape(scenario.name)}",
        subtitle=", ".join(scenario.solver.tiers),
    ))
    try:
        results = run_scenario(scenario, base_dir=config.parent)
        report = compare_tiers(results)
        console.print(report.to_table())
        written = export_results(results, directory=output_dir)
    except (SolverError, ExportError) as exc:
        _fail(exc, EXIT_SOLVER)
    except ConfigError as exc:
        _fail(exc, EXIT_CONFIG)

    console.print(f"[green]Results written to:[/green] {written[0].parent if written else output_dir}")


@app.command()
def validate(
    config: Path = typer.Argument(..., help="Scenario TOML file"),
):
    """
    Check a scenario file without running it.

    Example:
        python -m guideforge validate bent.toml
    """
    scenario = _load(config)
    try:
        curve = scenario.build_curve(config.parent)
        scenario.build_potential(config.parent)
    except ConfigError as exc:
        _fail(exc, EXIT_CONFIG)
    except SolverError as exc:
        _fail(exc, EXIT_CONFIG)

    modes = scenario.modes
    console.print(Panel.fit(
        f"[bold]{escape(scenario.name)}[/bold]\n"
        f"Curve: {escape(curve.summary())}\n"
        f"Cross-section: {scenario.cross_section.family}\n"
        f"Subset: {modes.subset} of {modes.n_total} modes\n"
        f"Tiers: {', '.join(scenario.solver.tiers)}\n"
        f"Grid: {scenario.solver.nx}x{scenario.solver.ny}, {scenario.solver.slices} slices",
        title="[green]Valid scenario[/green]",
        border_style="green",
    ))


from .cli_presets import list_presets_command
app.command(name="list-presets")(list_presets_command)


if __name__ == "__main__":
    app()
