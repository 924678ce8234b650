"""
Preset listing CLI command for GuideForge.
"""

from typing import Optional

import typer
from rich.console import Console
from rich.table import Table

console = Console()


def list_presets_command(
    show: Optional[str] = typer.Option(
        None,
        "--show", "-s",
        help="Print the full configuration of one preset as JSON"
    ),
):
    """
    List the named scenarios a config can start from with preset = "<name>".

    Example:
        python -m guideforge list-presets --show bent_arc_thin
    """
    from .errors import ConfigError
    from .scenarios import PRESETS, get_preset, list_presets

    if show:
        try:
            console.print_json(get_preset(show).model_dump_json(exclude_none=True))
        except ConfigError as exc:
            console.print(f"[red]Error:[/red] {exc}")
            raise typer.Exit(2)
        return

    table = Table(title="Presets")
    table.add_column("Name", style="cyan")
    table.add_column("Curve")
    table.add_column("Cross-section")
    table.add_column("Subset", justify="right")
    table.add_column("Tiers")
    table.add_column("Description", style="dim")
    for name, description in list_presets():
        cfg = PRESETS[name]()
        table.add_row(
            name,
            cfg.curve.preset,
            cfg.cross_section.family,
            ",".join(map(str, cfg.modes.subset)),
            ", ".join(cfg.solver.tiers),
            description if description != name else "",
        )
    console.print(table)
