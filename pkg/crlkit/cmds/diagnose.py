import logging
import os

import click
import numpy as np
from rich.console import Console
from rich.table import Table

import crlkit
from crlkit import cli_helper
from crlkit.log import log
from crlkit.experiment import runner
from crlkit.main import cli


LOG = logging.getLogger("CRLKIT")


@cli.command()
@cli_helper.add_options(cli_helper.common_options)
@click.option("--seed", type=int, default=None, help="Seed of both runs.")
@click.option("--out", type=click.Path(file_okay=False), default=None,
              help="Directory the paired runs are written to.")
@click.option("--steps", type=click.IntRange(min=1), default=None,
              help="Override [experiment] total_steps.")
@click.argument("config_file", type=click.Path())
@click.pass_context
@cli_helper.process_standard_options
@cli_helper.exit_on_errors
def diagnose(ctx, config_file, seed, out, steps):
    """Normalized against unnormalized multipliers on the two-phase arena."""
    console = Console()
    console.print(f"crlkit diagnose started version: {crlkit.__version__}")
    config = cli_helper.load_experiment(seed=seed, steps=steps, out=out)
    root = out or os.path.join(config.output_dir, config.name)
    with log.results_log(root):
        result = runner.run_diagnostic(config, root=root)

    table = Table(title="[bold][magenta]Multiplier normalization diagnostic[/]")
    table.add_column("Mode", style="cyan")
    table.add_column("Outcome")
    table.add_column("Largest multiplier", justify="right")
    table.add_column("Largest critic loss", justify="right")
    table.add_column("Final rates", justify="right")
    for mode, run in result.runs.items():
        largest = max(
            (float(np.max(t.lambdas)) for t in run.multiplier_trace if len(t.lambdas)),
            default=float("nan"),
        )
        losses = [np.nanmax(r.critic_losses) for r in run.reports]
        final = run.final
        table.add_row(
            mode,
            f"[red]diverged: {run.error}[/]" if run.diverged else "[green]completed[/]",
            f"{largest:.4g}",
            f"{max(losses):.4g}" if losses else "-",
            " ".join(f"{r:.4f}" for r in final.rates) if final else "-",
        )
    console.print(table)
    console.print(f"Results in {result.root}")
