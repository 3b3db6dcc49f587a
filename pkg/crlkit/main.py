#
# Constrained reinforcement learning with indicator constraints.
#
# Behavior is specified as bounds on the rate of indicator events (being in
# lava, looking away from a marker, speeding, running low on energy) plus a
# lower bound on task success, and a soft actor-critic Lagrangian learns a
# policy that meets them.
#
import importlib.metadata as imp
from importlib.metadata import version as metadata_version
import logging
import sys

import click
from oslo_config import cfg, generator

# local imports here
import crlkit
from crlkit import cli_helper, threads


CONF = cfg.CONF
LOG = logging.getLogger("CRLKIT")
CONTEXT_SETTINGS = dict(help_option_names=["-h", "--help"])


@click.group(cls=cli_helper.AliasedGroup, context_settings=CONTEXT_SETTINGS)
@click.version_option()
@click.pass_context
def cli(ctx):
    pass


def load_commands():
    from .cmds import (  # noqa
        diagnose, evaluate, plot, sweep, train,
    )


def main():
    # First import all the possible commands for the CLI
    # The commands themselves live in the cmds directory
    load_commands()
    cli(auto_envvar_prefix="CRLKIT")


def signal_handler(sig, frame):
    click.echo("signal_handler: called")
    LOG.info("Ctrl+C, stopping all worker threads after their current job")
    threads.CRLThreadList().stop_all()


@cli.command()
@click.pass_context
def sample_config(ctx):
    """Generate a sample config file with every crlkit option."""

    def get_namespaces():
        args = []
        for entry in imp.entry_points(group="oslo.config.opts"):
            if "crlkit" in entry.name:
                args.append("--namespace")
                args.append(entry.name)
        return args

    args = get_namespaces()
    config_version = metadata_version("oslo.config")
    logging.basicConfig(level=logging.WARN)
    conf = cfg.ConfigOpts()
    generator.register_cli_opts(conf)
    try:
        conf(args, version=config_version)
    except cfg.RequiredOptError:
        conf.print_help()
        if not sys.argv[1:]:
            raise SystemExit
        raise
    generator.generate(conf)


@cli.command()
@click.pass_context
def version(ctx):
    """Show the crlkit version."""
    click.echo(click.style("crlkit Version : ", fg="white"), nl=False)
    click.secho(f"{crlkit.__version__}", fg="yellow", bold=True)


if __name__ == "__main__":
    main()
