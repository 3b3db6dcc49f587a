from oslo_config import cfg


common_opts = [
    cfg.BoolOpt(
        "trace_enabled",
        default=False,
        help="Enable call tracing of the agent update methods (DEBUG only).",
    ),
]


def register_opts(config):
    config.register_opts(common_opts)


def list_opts():
    return {
        "DEFAULT": common_opts,
    }
