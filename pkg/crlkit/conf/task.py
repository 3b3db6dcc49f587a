"""Task and constraint options.

The constraint list is open ended, so each constraint gets its own
``[constraint_<name>]`` group that is registered once ``[task] constraints``
has been read from the config file.
"""
from oslo_config import cfg


CONSTRAINT_GROUP_PREFIX = "constraint_"

task_group = cfg.OptGroup(
    name="task",
    title="Behavior specification: the constraints enforced on the agent",
)

task_opts = [
    cfg.ListOpt(
        "constraints",
        default=[],
        help="Names of the behavioral constraints. Each name needs a "
             "[constraint_<name>] section.",
    ),
    cfg.StrOpt(
        "success_constraint",
        default=None,
        help="Name of the success constraint (must be a lower bound). "
             "Leave unset to train without one.",
    ),
    cfg.BoolOpt(
        "use_bootstrap",
        default=True,
        help="Let the success multiplier lend its weight to the main reward.",
    ),
    cfg.FloatOpt(
        "cost_discount",
        default=None,
        min=0.0,
        max=0.999999,
        help="Default discount of the cost critics. Unset means [agent] gamma.",
    ),
]

constraint_opts = [
    cfg.StrOpt(
        "indicator",
        default=None,
        help="Environment indicator the constraint reads. Defaults to the "
             "constraint name.",
    ),
    cfg.StrOpt(
        "kind",
        default="upper_bound",
        choices=["upper_bound", "lower_bound"],
        help="Direction of the bound on the event rate.",
    ),
    cfg.FloatOpt(
        "threshold",
        min=0.0,
        max=1.0,
        help="Desired event rate, a probability.",
    ),
    cfg.BoolOpt(
        "invert",
        default=False,
        help="Constrain 1 - indicator instead of the indicator.",
    ),
    cfg.FloatOpt(
        "discount",
        default=None,
        min=0.0,
        max=0.999999,
        help="Discount of this constraint's critic. Unset means "
             "[task] cost_discount.",
    ),
]


def constraint_group_name(name):
    return f"{CONSTRAINT_GROUP_PREFIX}{name}"


def register_constraint_opts(config, names):
    """Register a [constraint_<name>] group for every name."""
    for name in names:
        group = cfg.OptGroup(
            name=constraint_group_name(name),
            title=f"Constraint '{name}'",
        )
        config.register_group(group)
        config.register_opts(constraint_opts, group=group)


def register_opts(config):
    config.register_group(task_group)
    config.register_opts(task_opts, group=task_group)


def list_opts():
    return {
        task_group.name: task_opts,
        constraint_group_name("NAME"): constraint_opts,
    }
