from oslo_config import cfg


arena_group = cfg.OptGroup(
    name="arena",
    title="MiniArena simulator settings",
)
diagnostic_group = cfg.OptGroup(
    name="diagnostic",
    title="Two-phase diagnostic environment settings",
)

arena_opts = [
    cfg.IntOpt(
        "episode_length",
        default=150,
        min=1,
        help="Time limit T in steps.",
    ),
    cfg.FloatOpt(
        "goal_radius",
        default=0.05,
        min=0.0,
        max=0.5,
        help="Distance to the goal that counts as reaching it.",
    ),
    cfg.MultiStrOpt(
        "lava",
        default=["0.35,0.0,0.45,0.4", "0.55,0.6,0.65,1.0"],
        help="Lava rectangle as x0,y0,x1,y1. Repeat the option for more "
             "rectangles.",
    ),
    cfg.ListOpt(
        "marker",
        default=["0.5", "0.5"],
        help="Position of the look-at marker as x,y.",
    ),
    cfg.FloatOpt(
        "fov_half_angle",
        default=0.785398163397,
        min=0.0,
        help="Half angle in radians of the field-of-view cone.",
    ),
    cfg.FloatOpt(
        "v_max",
        default=0.25,
        min=0.0,
        help="Speed limit. Faster than this raises the above_speed event.",
    ),
    cfg.FloatOpt(
        "speed_cap",
        default=0.5,
        min=0.0,
        help="Hard physical cap on the speed.",
    ),
    cfg.FloatOpt(
        "accel",
        default=1.5,
        min=0.0,
        help="Acceleration produced by a unit action.",
    ),
    cfg.FloatOpt(
        "drag",
        default=1.0,
        min=0.0,
        help="Linear drag coefficient.",
    ),
    cfg.FloatOpt(
        "turn_rate",
        default=6.0,
        min=0.0,
        help="Heading change in radians per second for a unit action.",
    ),
    cfg.FloatOpt(
        "dt",
        default=0.1,
        min=0.0,
        help="Integration time step.",
    ),
    cfg.FloatOpt(
        "energy_drain",
        default=0.6,
        min=0.0,
        help="Energy drained per unit of distance travelled.",
    ),
    cfg.FloatOpt(
        "recharge_rate",
        default=0.1,
        min=0.0,
        help="Energy regained per recharging step.",
    ),
    cfg.FloatOpt(
        "min_energy",
        default=0.2,
        min=0.0,
        max=1.0,
        help="Below this energy level the below_energy event fires.",
    ),
    cfg.FloatOpt(
        "initial_energy_low",
        default=0.3,
        min=0.0,
        max=1.0,
        help="Initial energy is drawn uniformly from [initial_energy_low, 1].",
    ),
    cfg.FloatOpt(
        "shaping",
        default=0.3,
        min=0.0,
        help="Coefficient of the distance progress shaping reward.",
    ),
]

diagnostic_opts = [
    cfg.BoolOpt(
        "enabled",
        default=False,
        help="Add the switchable diagnostic event to the arena.",
    ),
    cfg.IntOpt(
        "switch_step",
        default=50000,
        min=0,
        help="Environment step at which the impossible event is replaced by "
             "an avoidable one.",
    ),
    cfg.FloatOpt(
        "threshold",
        default=0.01,
        min=0.0,
        max=1.0,
        help="Threshold of the diagnostic constraint.",
    ),
]


def register_opts(config):
    config.register_group(arena_group)
    config.register_opts(arena_opts, group=arena_group)
    config.register_group(diagnostic_group)
    config.register_opts(diagnostic_opts, group=diagnostic_group)


def list_opts():
    return {
        arena_group.name: arena_opts,
        diagnostic_group.name: diagnostic_opts,
    }
