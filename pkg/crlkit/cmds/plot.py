import logging

import click
from rich.console import Console
from rich.table import Table

from crlkit import cli_helper
from crlkit.experiment import plots
from crlkit.main import cli


LOG = logging.getLogger("CRLKIT")


@cli.command()
@cli_helper.add_options(cli_helper.common_options)
@click.option("--out", type=click.Path(file_okay=False), default=None,
              help="Write the charts here instead of next to the CSVs.")
@click.argument("run_dir", type=click.Path(exists=True, file_okay=False))
@click.pass_context
@cli_helper.process_standard_options_no_config
@cli_helper.exit_on_errors
def plot(ctx, run_dir, out):
    """Draw SVG charts out of the CSVs in RUN_DIR."""
    console = Console()
    charts = plots.emit_plots(run_dir, out_dir=out)
    table = Table(title=f"[bold][magenta]Charts for {run_dir}[/]")
    table.add_column("Chart", style="cyan")
    table.add_column("Points / grid", justify="right")
    table.add_column("File", style="blue")
    for name, chart in charts.items():
        size = "x".join(str(n) for n in chart.shape) if chart.shape else str(chart.points)
        table.add_row(name, size, chart.path)
    console.print(table)
