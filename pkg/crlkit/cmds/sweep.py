from dataclasses import replace
import logging
import os

import click
from rich.console import Console
from rich.table import Table

import crlkit
from crlkit import baseline, cli_helper
from crlkit.log import log
from crlkit.main import cli


LOG = logging.getLogger("CRLKIT")


@cli.command()
@cli_helper.add_options(cli_helper.common_options)
@click.option("--seed", type=int, default=None, help="Run this seed only, instead of [sweep] seeds.")
@click.option("--out", type=click.Path(file_okay=False), default=None,
              help="Directory the sweep is written to.")
@click.option("--steps", type=click.IntRange(min=1), default=None,
              help="Override [sweep] steps_per_cell.")
@click.argument("config_file", type=click.Path())
@click.pass_context
@cli_helper.process_standard_options
@cli_helper.exit_on_errors
def sweep(ctx, config_file, seed, out, steps):
    """Reward-engineering grid sweep over the penalty weights of CONFIG_FILE."""
    console = Console()
    console.print(f"crlkit sweep started version: {crlkit.__version__}")
    config = cli_helper.load_experiment()
    grid = baseline.SweepGrid.from_sweep_config(config.sweep)
    if seed is not None or steps is not None:
        grid = replace(
            grid,
            seeds=(seed,) if seed is not None else grid.seeds,
            steps_per_cell=steps or grid.steps_per_cell,
        )
    root = out or os.path.join(config.output_dir, config.name, "sweep")
    with log.results_log(root):
        report = baseline.run_sweep(
            grid, config, root=root,
            workers=config.sweep.workers, success_bar=config.sweep.success_bar,
        )

    table = Table(
        title=(
            f"[bold][magenta]{grid.size} cells x {len(grid.seeds)} seeds[/]  "
            f"good = feasible and success >= {config.sweep.success_bar:g}"
        ),
    )
    for name in grid.constraints:
        table.add_column(f"w_{name}", style="cyan", justify="right")
    table.add_column("Seed", justify="right")
    table.add_column("Return", style="bold yellow", justify="right")
    table.add_column("Success", style="bold green", justify="right")
    for name in grid.constraints:
        table.add_column(f"rate_{name}", justify="right")
    table.add_column("Good", justify="center")
    for cell in report.cells:
        if cell.error:
            table.add_row(
                *[f"{w:g}" for w in cell.weights.weights], str(cell.seed),
                "-", "-", *["-"] * len(grid.constraints), f"[red]{cell.error}[/]",
            )
            continue
        table.add_row(
            *[f"{w:g}" for w in cell.weights.weights],
            str(cell.seed),
            f"{cell.mean_return:.3f}",
            f"{cell.success_rate:.2f}",
            *[f"{r:.4f}" for r in cell.rates],
            "[green]yes[/]" if cell.good else "[red]no[/]",
        )
    console.print(table)
    console.print(
        f"feasible {report.feasible_fraction():.2f}, "
        f"good {report.good_fraction():.2f}. Results in {root}",
    )
