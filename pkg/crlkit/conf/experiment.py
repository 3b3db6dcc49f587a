from pathlib import Path

from oslo_config import cfg


home = str(Path.home())
DEFAULT_OUTPUT_DIR = f"{home}/.local/share/crlkit/runs"

experiment_group = cfg.OptGroup(
    name="experiment",
    title="Training and evaluation protocol",
)
sweep_group = cfg.OptGroup(
    name="sweep",
    title="Reward-engineering grid sweep",
)

experiment_opts = [
    cfg.StrOpt(
        "name",
        default="experiment",
        help="Name of the experiment, used for the run directory.",
    ),
    cfg.IntOpt(
        "total_steps",
        default=200000,
        min=1,
        help="Environment steps per training run.",
    ),
    cfg.IntOpt(
        "eval_period",
        default=5000,
        min=1,
        help="Environment steps between evaluations.",
    ),
    cfg.IntOpt(
        "eval_episodes",
        default=10,
        min=1,
        help="Greedy episodes per evaluation.",
    ),
    cfg.ListOpt(
        "seeds",
        default=["0"],
        help="Seeds to train. Each seed is an independent run.",
    ),
    cfg.StrOpt(
        "output_dir",
        default=DEFAULT_OUTPUT_DIR,
        help="Where run directories are written.",
    ),
    cfg.FloatOpt(
        "feasibility_tolerance",
        default=0.02,
        min=0.0,
        help="Absolute slack on the thresholds when reporting feasibility.",
    ),
    cfg.IntOpt(
        "workers",
        default=1,
        min=1,
        help="Worker threads for multi-seed runs.",
    ),
    cfg.BoolOpt(
        "save_checkpoints",
        default=True,
        help="Write policy, critics and multipliers at the end of a run.",
    ),
]

sweep_opts = [
    cfg.ListOpt(
        "constraints",
        default=[],
        help="Constraints turned into fixed penalties. They must also be "
             "declared in [task].",
    ),
    cfg.ListOpt(
        "weights",
        default=["0.1", "1.0", "10.0"],
        help="Candidate penalty weights, shared by every swept constraint.",
    ),
    cfg.IntOpt(
        "steps_per_cell",
        default=50000,
        min=1,
        help="Training budget of each grid cell.",
    ),
    cfg.IntOpt(
        "eval_episodes",
        default=10,
        min=1,
        help="Greedy episodes used to score each cell.",
    ),
    cfg.ListOpt(
        "seeds",
        default=["0"],
        help="Seeds per cell.",
    ),
    cfg.FloatOpt(
        "success_bar",
        default=0.8,
        min=0.0,
        max=1.0,
        help="Success rate a feasible cell needs to count as good performing.",
    ),
    cfg.IntOpt(
        "workers",
        default=1,
        min=1,
        help="Worker threads running cells.",
    ),
]


def register_opts(config):
    config.register_group(experiment_group)
    config.register_opts(experiment_opts, group=experiment_group)
    config.register_group(sweep_group)
    config.register_opts(sweep_opts, group=sweep_group)


def list_opts():
    return {
        experiment_group.name: experiment_opts,
        sweep_group.name: sweep_opts,
    }
