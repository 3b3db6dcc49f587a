from oslo_config import cfg

from crlkit.conf import agent, arena, common, experiment, log, multipliers, task


CONF = cfg.CONF

log.register_opts(CONF)
common.register_opts(CONF)
agent.register_opts(CONF)
multipliers.register_opts(CONF)
task.register_opts(CONF)
arena.register_opts(CONF)
experiment.register_opts(CONF)


def register_constraints(config=CONF):
    """Register the per-constraint groups named in [task] and [sweep].

    Must run after the config file has been parsed.
    """
    names = list(config.task.constraints)
    if config.task.success_constraint:
        names.append(config.task.success_constraint)
    for name in config.sweep.constraints:
        if name not in names:
            names.append(name)
    missing = [
        n for n in names
        if task.constraint_group_name(n) not in config
    ]
    task.register_constraint_opts(config, missing)
    return names
