"""Immutable experiment settings built out of the parsed oslo config.

Workers get these dataclasses, never the global CONF, so a run is fully
described by its ``config.json``.
"""
from dataclasses import dataclass, field, replace
import logging
from typing import List, Optional

from dataclasses_json import dataclass_json

from crlkit import cmdp, conf, exception
from crlkit.agents.sac import AgentConfig
from crlkit.conf import task as task_conf
from crlkit.envs import ArenaConfig, DiagnosticConfig, make_env
from crlkit.multipliers import MultiplierConfig


LOG = logging.getLogger("CRLKIT")


def _constraint_from_conf(config, name, default_discount) -> cmdp.ConstraintSpec:
    group = config[task_conf.constraint_group_name(name)]
    if group.threshold is None:
        raise exception.ConfigurationError(
            f"[{task_conf.constraint_group_name(name)}] needs a threshold",
        )
    discount = group.discount if group.discount is not None else default_discount
    return cmdp.ConstraintSpec(
        name=name,
        kind=group.kind,
        threshold=group.threshold,
        discount=discount,
        indicator=group.indicator,
        invert=group.invert,
    )


def task_from_conf(config) -> cmdp.TaskSpec:
    conf.register_constraints(config)
    default_discount = config.task.cost_discount
    constraints = [
        _constraint_from_conf(config, name, default_discount)
        for name in config.task.constraints
    ]
    success = None
    if config.task.success_constraint:
        success = _constraint_from_conf(config, config.task.success_constraint, default_discount)
    return cmdp.TaskSpec(
        constraints=constraints,
        success=success,
        gamma=config.agent.gamma,
        use_bootstrap=config.task.use_bootstrap,
    )


@dataclass_json
@dataclass(frozen=True)
class SweepConfig:
    constraints: List[str] = field(default_factory=list)
    weights: List[float] = field(default_factory=lambda: [0.1, 1.0, 10.0])
    steps_per_cell: int = 50000
    eval_episodes: int = 10
    seeds: List[int] = field(default_factory=lambda: [0])
    success_bar: float = 0.8
    workers: int = 1

    @classmethod
    def from_conf(cls, config) -> "SweepConfig":
        try:
            weights = [float(w) for w in config.sweep.weights]
            seeds = [int(s) for s in config.sweep.seeds]
        except ValueError as ex:
            raise exception.ConfigurationError(f"Bad [sweep] list: {ex}")
        return cls(
            constraints=list(config.sweep.constraints),
            weights=weights,
            steps_per_cell=config.sweep.steps_per_cell,
            eval_episodes=config.sweep.eval_episodes,
            seeds=seeds,
            success_bar=config.sweep.success_bar,
            workers=config.sweep.workers,
        )


@dataclass_json
@dataclass(frozen=True)
class ExperimentConfig:
    name: str = "experiment"
    task: cmdp.TaskSpec = field(default_factory=cmdp.TaskSpec)
    arena: ArenaConfig = field(default_factory=ArenaConfig)
    diagnostic: Optional[DiagnosticConfig] = None
    agent: AgentConfig = field(default_factory=AgentConfig)
    multipliers: MultiplierConfig = field(default_factory=MultiplierConfig)
    total_steps: int = 200000
    eval_period: int = 5000
    eval_episodes: int = 10
    seeds: List[int] = field(default_factory=lambda: [0])
    output_dir: str = "runs"
    feasibility_tolerance: float = 0.02
    workers: int = 1
    save_checkpoints: bool = True
    sweep: SweepConfig = field(default_factory=SweepConfig)

    def __post_init__(self):
        if self.eval_period < 1:
            raise exception.ConfigurationError(f"eval_period must be >= 1, got {self.eval_period}")
        if self.total_steps < 1:
            raise exception.ConfigurationError(f"total_steps must be >= 1, got {self.total_steps}")
        if not self.seeds:
            raise exception.ConfigurationError("At least one seed is needed")
        emitted = set(make_env(self.arena, self.diagnostic).indicator_names)
        for c in self.task.all_constraints:
            if c.source not in emitted:
                raise exception.ConfigurationError(
                    f"Constraint '{c.name}' reads '{c.source}', the environment "
                    f"emits {sorted(emitted)}",
                )
        names = self.task.names
        for name in self.sweep.constraints:
            if name not in names:
                raise exception.ConfigurationError(
                    f"Swept constraint '{name}' is not declared in [task]",
                )

    @classmethod
    def from_conf(cls, config=None) -> "ExperimentConfig":
        config = config or conf.CONF
        try:
            seeds = [int(s) for s in config.experiment.seeds]
        except ValueError as ex:
            raise exception.ConfigurationError(f"Bad [experiment] seeds: {ex}")
        diagnostic = None
        if config.diagnostic.enabled:
            diagnostic = DiagnosticConfig.from_conf(config.diagnostic)
        return cls(
            name=config.experiment.name,
            task=task_from_conf(config),
            arena=ArenaConfig.from_conf(config.arena),
            diagnostic=diagnostic,
            agent=AgentConfig.from_conf(config),
            multipliers=MultiplierConfig.from_conf(config.multipliers),
            total_steps=config.experiment.total_steps,
            eval_period=config.experiment.eval_period,
            eval_episodes=config.experiment.eval_episodes,
            seeds=seeds,
            output_dir=config.experiment.output_dir,
            feasibility_tolerance=config.experiment.feasibility_tolerance,
            workers=config.experiment.workers,
            save_checkpoints=config.experiment.save_checkpoints,
            sweep=SweepConfig.from_conf(config),
        )

    def with_overrides(self, seed=None, steps=None, mode=None, no_bootstrap=False,
                       output_dir=None) -> "ExperimentConfig":
        """Apply the command line overrides."""
        out = self
        if seed is not None:
            out = replace(out, seeds=[int(seed)])
        if steps is not None:
            out = replace(out, total_steps=int(steps))
        if mode is not None:
            out = replace(out, multipliers=replace(out.multipliers, mode=mode))
        if no_bootstrap:
            out = replace(out, task=replace(out.task, use_bootstrap=False))
        if output_dir is not None:
            out = replace(out, output_dir=str(output_dir))
        return out
