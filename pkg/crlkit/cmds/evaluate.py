import logging

import click
from rich.console import Console

import crlkit
from crlkit import cli_helper, exception
from crlkit.cmds.train import reports_table
from crlkit.experiment import runner
from crlkit.main import cli


LOG = logging.getLogger("CRLKIT")


@cli.command(name="eval", aliases=["evaluate"])
@cli_helper.add_options(cli_helper.common_options)
@click.option("--seed", type=int, default=None, help="Seed of the evaluation episodes.")
@click.option("--episodes", type=click.IntRange(min=1), default=None,
              help="Override [experiment] eval_episodes.")
@click.argument("checkpoint", type=click.Path())
@click.argument("config_file", type=click.Path())
@click.pass_context
@cli_helper.process_standard_options
@cli_helper.exit_on_errors
def evaluate(ctx, checkpoint, config_file, seed, episodes):
    """Greedy evaluation of CHECKPOINT on the task of CONFIG_FILE."""
    console = Console()
    console.print(f"crlkit eval started version: {crlkit.__version__}")
    config = cli_helper.load_experiment()
    try:
        report = runner.evaluate(checkpoint, config, n_episodes=episodes, seed=seed)
    except FileNotFoundError as ex:
        raise exception.ConfigurationError(f"Can't read checkpoint: {ex}")
    console.print(reports_table(
        f"{checkpoint}: {report.episodes} greedy episodes",
        config.task, [("checkpoint", report)], config.feasibility_tolerance,
    ))
