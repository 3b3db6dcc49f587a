from functools import update_wrapper
import logging
import os
import sys
import typing as t

import click
from oslo_config import cfg

import crlkit
from crlkit import conf  # noqa: F401
from crlkit import exception
from crlkit.log import log
from crlkit.utils import trace


CONF = cfg.CONF
LOG = logging.getLogger("CRLKIT")

EXIT_CONFIG_ERROR = 2
EXIT_DIVERGENCE = 3

F = t.TypeVar("F", bound=t.Callable[..., t.Any])

common_options = [
    click.option(
        "--loglevel",
        default="INFO",
        show_default=True,
        type=click.Choice(
            ["CRITICAL", "ERROR", "WARNING", "INFO", "DEBUG"],
            case_sensitive=False,
        ),
        show_choices=True,
        help="The log level to use for crlkit.",
    ),
    click.option(
        "--quiet",
        is_flag=True,
        default=False,
        help="Don't log to stdout",
    ),
]

run_options = [
    click.option(
        "--seed",
        type=int,
        default=None,
        help="Run this seed only, instead of [experiment] seeds.",
    ),
    click.option(
        "--out",
        type=click.Path(file_okay=False),
        default=None,
        help="Directory the results are written to.",
    ),
    click.option(
        "--steps",
        type=click.IntRange(min=1),
        default=None,
        help="Override [experiment] total_steps.",
    ),
    click.option(
        "--mode",
        type=click.Choice(["normalized", "unnormalized"]),
        default=None,
        help="Override [multipliers] mode.",
    ),
    click.option(
        "--no-bootstrap",
        is_flag=True,
        default=False,
        help="Don't let the success multiplier weigh in on the reward.",
    ),
]


class AliasedGroup(click.Group):
    def command(self, *args, **kwargs):
        """A shortcut decorator for declaring and attaching a command to
        the group.  This takes the same arguments as :func:`command` but
        immediately registers the created command with this instance by
        calling into :meth:`add_command`.
        Copied from `click` and extended for `aliases`.
        """
        def decorator(f):
            aliases = kwargs.pop("aliases", [])
            cmd = click.decorators.command(*args, **kwargs)(f)
            self.add_command(cmd)
            for alias in aliases:
                self.add_command(cmd, name=alias)
            return cmd
        return decorator


def add_options(options):
    def _add_options(func):
        for option in reversed(options):
            func = option(func)
        return func
    return _add_options


def parse_config_file(config_file):
    """Load an experiment config file into the global CONF."""
    if not os.path.isfile(config_file):
        raise exception.ConfigurationError(f"Config file {config_file} not found")
    try:
        CONF(
            [], project="crlkit", version=crlkit.__version__,
            default_config_files=[config_file],
        )
    except cfg.Error as ex:
        raise exception.ConfigurationError(f"Can't parse {config_file}: {ex}")


def process_standard_options(f: F) -> F:
    """Parse the experiment config (the ``config_file`` argument) then set up logging."""
    def new_func(*args, **kwargs):
        ctx = args[0]
        ctx.ensure_object(dict)
        config_error = None
        try:
            parse_config_file(kwargs["config_file"])
        except exception.ConfigurationError as ex:
            config_error = ex
        ctx.obj["loglevel"] = kwargs["loglevel"]
        ctx.obj["quiet"] = kwargs["quiet"]
        log.setup_logging(
            ctx.obj["loglevel"],
            ctx.obj["quiet"],
        )
        if config_error is not None:
            LOG.error(config_error.message)
            click.secho(f"Configuration error: {config_error.message}", fg="red", err=True)
            sys.exit(EXIT_CONFIG_ERROR)
        if CONF.trace_enabled:
            trace.setup_tracing(["method", "api"])

        del kwargs["loglevel"]
        del kwargs["quiet"]
        return f(*args, **kwargs)

    return update_wrapper(t.cast(F, new_func), f)


def process_standard_options_no_config(f: F) -> F:
    """Use this as a decorator when config isn't needed."""
    def new_func(*args, **kwargs):
        ctx = args[0]
        ctx.ensure_object(dict)
        ctx.obj["loglevel"] = kwargs["loglevel"]
        ctx.obj["quiet"] = kwargs["quiet"]
        log.setup_logging(
            ctx.obj["loglevel"],
            ctx.obj["quiet"],
        )

        del kwargs["loglevel"]
        del kwargs["quiet"]
        return f(*args, **kwargs)

    return update_wrapper(t.cast(F, new_func), f)


def exit_on_errors(f: F) -> F:
    """Map configuration errors to exit 2 and divergence aborts to exit 3."""
    def new_func(*args, **kwargs):
        try:
            return f(*args, **kwargs)
        except exception.ConfigurationError as ex:
            LOG.error(f"Configuration error: {ex.message}")
            click.secho(f"Configuration error: {ex.message}", fg="red", err=True)
            sys.exit(EXIT_CONFIG_ERROR)
        except exception.DivergenceError as ex:
            LOG.error(f"Diverged in {ex.where}: {ex.message}")
            click.secho(f"Run diverged: {ex.message}", fg="red", err=True)
            sys.exit(EXIT_DIVERGENCE)
        except exception.CRLKitException as ex:
            LOG.error(ex.message)
            click.secho(ex.message, fg="red", err=True)
            sys.exit(1)

    return update_wrapper(t.cast(F, new_func), f)


def load_experiment(seed=None, out=None, steps=None, mode=None, no_bootstrap=False):
    """ExperimentConfig out of the parsed CONF plus the command line overrides."""
    from crlkit.experiment.config import ExperimentConfig

    try:
        config = ExperimentConfig.from_conf(CONF)
    except (cfg.Error, ValueError) as ex:
        raise exception.ConfigurationError(str(ex))
    CONF.log_opt_values(LOG, logging.DEBUG)
    return config.with_overrides(
        seed=seed, steps=steps, mode=mode, no_bootstrap=no_bootstrap, output_dir=out,
    )
