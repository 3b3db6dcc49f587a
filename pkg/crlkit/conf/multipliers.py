from oslo_config import cfg


multipliers_group = cfg.OptGroup(
    name="multipliers",
    title="Lagrange multiplier settings",
)

multipliers_opts = [
    cfg.StrOpt(
        "mode",
        default="normalized",
        choices=["normalized", "unnormalized"],
        help="'normalized' passes the base parameters through a softmax with "
             "a fixed anchor. 'unnormalized' is the ablation that keeps raw "
             "multipliers clipped at zero.",
    ),
    cfg.FloatOpt(
        "learning_rate",
        default=0.03,
        min=0.0,
        help="Adam learning rate for the multiplier parameters.",
    ),
    cfg.FloatOpt(
        "initial_value",
        default=0.02,
        help="Initial value of every multiplier parameter z_k.",
    ),
    cfg.IntOpt(
        "update_period",
        default=2000,
        min=1,
        help="Environment transitions between multiplier updates (M_lambda).",
    ),
    cfg.IntOpt(
        "batch_size",
        default=2000,
        min=1,
        help="Number of most recent transitions used to estimate the "
             "constraint rates (N_lambda).",
    ),
    cfg.StrOpt(
        "jacobian",
        default="diagonal",
        choices=["diagonal", "full"],
        help="'diagonal' steps each z_k on its own objective through "
             "d(lambda_k)/d(z_k). 'full' differentiates the summed objective "
             "through the whole softmax, whose cross terms can move z_k "
             "against the sign of its own constraint.",
    ),
]


def register_opts(config):
    config.register_group(multipliers_group)
    config.register_opts(multipliers_opts, group=multipliers_group)


def list_opts():
    return {
        multipliers_group.name: multipliers_opts,
    }
