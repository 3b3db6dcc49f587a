import logging
import os
import signal

import click
from rich.console import Console
from rich.table import Table

import crlkit
from crlkit import cli_helper, exception
from crlkit.log import log
from crlkit import main as crlkit_main
from crlkit.experiment import runner
from crlkit.main import cli


LOG = logging.getLogger("CRLKIT")


def reports_table(title, task, rows, tolerance):
    """rows: (label, EvalReport) pairs."""
    table = Table(title=f"[bold][magenta]{title}[/]")
    table.add_column("Run", style="cyan", no_wrap=True)
    table.add_column("Step", justify="right")
    table.add_column("Return", style="bold yellow", justify="right")
    table.add_column("Success", style="bold green", justify="right")
    for c in task.all_constraints:
        bound = "<=" if c.kind == "upper_bound" else ">="
        table.add_column(f"{c.name} {bound} {c.threshold:g}", justify="right")
    table.add_column("Feasible", justify="center")
    for label, report in rows:
        if report is None:
            table.add_row(label, "-", "-", "-", *["-"] * task.n_indicators, "[red]failed[/]")
            continue
        feasible = report.feasible(task, tolerance)
        table.add_row(
            label,
            str(report.step),
            f"{report.mean_return:.3f}",
            f"{report.success_rate:.2f}",
            *[f"{r:.4f}" for r in report.rates],
            "[green]yes[/]" if feasible else "[red]no[/]",
        )
    return table


@cli.command()
@cli_helper.add_options(cli_helper.common_options)
@cli_helper.add_options(cli_helper.run_options)
@click.argument("config_file", type=click.Path())
@click.option(
    "--resume",
    type=click.Path(dir_okay=False),
    default=None,
    help="Carry on training from this checkpoint. Needs a single seed.",
)
@click.pass_context
@cli_helper.process_standard_options
@cli_helper.exit_on_errors
def train(ctx, config_file, seed, out, steps, mode, no_bootstrap, resume):
    """Train the constrained agent described by CONFIG_FILE."""
    signal.signal(signal.SIGINT, crlkit_main.signal_handler)
    signal.signal(signal.SIGTERM, crlkit_main.signal_handler)
    console = Console()
    console.print(f"crlkit train started version: {crlkit.__version__}")
    config = cli_helper.load_experiment(
        seed=seed, out=out, steps=steps, mode=mode, no_bootstrap=no_bootstrap,
    )
    root = out or os.path.join(config.output_dir, config.name)
    with log.results_log(root):
        summary = runner.train_all(config, root=root, resume=resume)

    rows = []
    for s in config.seeds:
        result = summary.results.get(s)
        rows.append((f"seed {s}", result.final if result else None))
    console.print(reports_table(
        f"{config.name}: final evaluation", config.task, rows, config.feasibility_tolerance,
    ))
    console.print(f"Results in {summary.root}")
    for s, error in sorted(summary.errors.items()):
        LOG.error(f"Seed {s} failed: {error}")
    diverged = [e for e in summary.errors.values() if isinstance(e, exception.DivergenceError)]
    if diverged:
        raise diverged[0]
    if summary.errors:
        raise next(iter(summary.errors.values()))
