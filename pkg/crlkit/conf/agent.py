"""Soft actor-critic options.

Defaults are the Arena hyperparameters.
"""
from oslo_config import cfg


agent_group = cfg.OptGroup(
    name="agent",
    title="Soft actor-critic agent settings",
)

agent_opts = [
    cfg.FloatOpt(
        "gamma",
        default=0.9,
        min=0.0,
        max=0.999999,
        help="Discount factor of the main reward.",
    ),
    cfg.FloatOpt(
        "alpha",
        default=0.02,
        min=0.0,
        help="Entropy coefficient.",
    ),
    cfg.FloatOpt(
        "alpha_decay",
        default=1.0,
        min=0.0,
        max=1.0,
        help="Multiplicative decay applied to alpha after every agent update. "
             "1.0 keeps alpha constant.",
    ),
    cfg.FloatOpt(
        "tau",
        default=0.005,
        min=0.0,
        max=1.0,
        help="Target networks soft-update coefficient.",
    ),
    cfg.FloatOpt(
        "learning_rate",
        default=0.0003,
        min=0.0,
        help="Adam learning rate for the policy and critics.",
    ),
    cfg.IntOpt(
        "batch_size",
        default=256,
        min=1,
        help="Minibatch size N_theta sampled uniformly for agent updates.",
    ),
    cfg.IntOpt(
        "update_period",
        default=200,
        min=1,
        help="Environment transitions between agent updates (M_theta).",
    ),
    cfg.IntOpt(
        "random_steps",
        default=10000,
        min=0,
        help="Number of uniformly random exploration steps at the start.",
    ),
    cfg.IntOpt(
        "warmup_steps",
        default=2560,
        min=0,
        help="Number of buffer warmup steps before the first update.",
    ),
    cfg.IntOpt(
        "buffer_size",
        default=1000000,
        min=1,
        help="Replay buffer capacity.",
    ),
    cfg.IntOpt(
        "hidden_size",
        default=256,
        min=1,
        help="Units in each of the two hidden layers of policy and critics.",
    ),
    cfg.StrOpt(
        "log_std_mode",
        default="state",
        choices=["state", "global"],
        help="'state' makes the policy output its log-std, 'global' learns "
             "one log-std vector shared by all states.",
    ),
    cfg.FloatOpt(
        "log_std_min",
        default=-20.0,
        help="Lower clamp of the policy log-std.",
    ),
    cfg.FloatOpt(
        "log_std_max",
        default=2.0,
        help="Upper clamp of the policy log-std.",
    ),
]


def register_opts(config):
    config.register_group(agent_group)
    config.register_opts(agent_opts, group=agent_group)


def list_opts():
    return {
        agent_group.name: agent_opts,
    }
