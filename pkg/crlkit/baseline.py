"""Reward engineering: fixed penalty weights and a grid sweep over them.

Every cell trains a plain soft actor-critic on ``r - sum_k w_k e_k`` and is
scored on the real behavior events, so the sweep answers how many weight
choices give a feasible, well performing policy.
"""
from dataclasses import dataclass, field, replace
import itertools
import logging
import os
from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from crlkit import cmdp, exception, utils
from crlkit.experiment.config import ExperimentConfig, SweepConfig
from crlkit.experiment.runner import run_training
from crlkit.threads import Job, JobRunner


LOG = logging.getLogger("CRLKIT")

SWEEP_FILE = "sweep.csv"


@dataclass(frozen=True)
class PenaltyWeights:
    weights: Tuple[float, ...]

    def __post_init__(self):
        if any(w < 0.0 for w in self.weights):
            raise exception.ConfigurationError(
                f"Penalty weights must be nonnegative, got {self.weights}",
            )

    def __len__(self):
        return len(self.weights)


def penalty_reward(r: float, indicators: Sequence[float], weights) -> float:
    """r - sum_k w_k e_k."""
    w = weights.weights if isinstance(weights, PenaltyWeights) else weights
    if len(indicators) != len(w):
        raise exception.ConfigurationError(
            f"{len(indicators)} indicators for {len(w)} penalty weights",
        )
    return float(r - sum(wk * ek for wk, ek in zip(w, indicators)))


@dataclass(frozen=True)
class SweepGrid:
    constraints: Tuple[str, ...]
    values: Tuple[Tuple[float, ...], ...]
    steps_per_cell: int = 50000
    eval_episodes: int = 10
    seeds: Tuple[int, ...] = (0,)

    def __post_init__(self):
        if not self.constraints:
            raise exception.ConfigurationError("A sweep needs at least one constraint")
        if len(self.values) != len(self.constraints):
            raise exception.ConfigurationError(
                f"{len(self.constraints)} swept constraints but "
                f"{len(self.values)} weight lists",
            )
        if any(len(v) == 0 for v in self.values):
            raise exception.ConfigurationError("Every swept constraint needs candidate weights")

    @classmethod
    def from_sweep_config(cls, sweep: SweepConfig) -> "SweepGrid":
        return cls(
            constraints=tuple(sweep.constraints),
            values=tuple(tuple(sweep.weights) for _ in sweep.constraints),
            steps_per_cell=sweep.steps_per_cell,
            eval_episodes=sweep.eval_episodes,
            seeds=tuple(sweep.seeds),
        )

    @property
    def shape(self) -> Tuple[int, ...]:
        return tuple(len(v) for v in self.values)

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))

    def cells(self) -> List[Tuple[Tuple[int, ...], PenaltyWeights]]:
        """(grid index, weights) for every cell, in row-major order."""
        out = []
        for index in itertools.product(*(range(n) for n in self.shape)):
            weights = tuple(self.values[k][i] for k, i in enumerate(index))
            out.append((index, PenaltyWeights(weights)))
        return out


@dataclass
class SweepCell:
    index: Tuple[int, ...]
    weights: PenaltyWeights
    seed: int
    mean_return: float = float("nan")
    success_rate: float = float("nan")
    rates: np.ndarray = field(default_factory=lambda: np.zeros(0))
    feasible: bool = False
    good: bool = False
    error: Optional[str] = None


@dataclass
class SweepReport:
    grid: SweepGrid
    task: cmdp.TaskSpec
    success_bar: float
    cells: List[SweepCell]

    def to_frame(self) -> pd.DataFrame:
        rows = []
        for c in self.cells:
            row = {"cell": int(np.ravel_multi_index(c.index, self.grid.shape)), "seed": c.seed}
            for name, w in zip(self.grid.constraints, c.weights.weights):
                row[f"w_{name}"] = w
            row["return"] = c.mean_return
            row["success_rate"] = c.success_rate
            for k, name in enumerate(self.grid.constraints):
                row[f"rate_{name}"] = c.rates[k] if len(c.rates) > k else float("nan")
            row["feasible"] = int(c.feasible)
            row["good"] = int(c.good)
            row["error"] = c.error or ""
            rows.append(row)
        return pd.DataFrame(rows)

    def write_csv(self, path) -> None:
        self.to_frame().to_csv(path, index=False, float_format="%.17g")

    def good_fraction(self) -> float:
        """Share of cells (seeds pooled) that are feasible and succeed often enough."""
        return float(np.mean([c.good for c in self.cells])) if self.cells else 0.0

    def feasible_fraction(self) -> float:
        return float(np.mean([c.feasible for c in self.cells])) if self.cells else 0.0

    def heat_grid(self, metric: str) -> np.ndarray:
        """Seed-averaged metric laid out on the weight grid."""
        total = np.zeros(self.grid.shape)
        count = np.zeros(self.grid.shape)
        for c in self.cells:
            value = {
                "return": c.mean_return,
                "success_rate": c.success_rate,
                "feasible": float(c.feasible),
                "good": float(c.good),
            }.get(metric)
            if value is None:
                name = metric[len("rate_"):]
                k = self.grid.constraints.index(name)
                value = c.rates[k] if len(c.rates) > k else float("nan")
            if np.isfinite(value):
                total[c.index] += value
                count[c.index] += 1
        with np.errstate(invalid="ignore"):
            return np.where(count > 0, total / np.maximum(count, 1), np.nan)


def scored_task(config: ExperimentConfig, names: Sequence[str]) -> cmdp.TaskSpec:
    """The behavioral constraints a sweep is judged on."""
    by_name = {c.name: c for c in config.task.constraints}
    missing = [n for n in names if n not in by_name]
    if missing:
        raise exception.ConfigurationError(
            f"Swept constraints {missing} aren't behavioral constraints in [task]",
        )
    return cmdp.TaskSpec(
        constraints=[by_name[n] for n in names],
        gamma=config.task.gamma,
        use_bootstrap=False,
    )


def _cell_job(config, scoring, weights, seed, run_dir):
    def job():
        def reward_fn(r, indicators):
            return penalty_reward(r, scoring.indicator_vector(indicators), weights)
        return run_training(
            config,
            seed=seed,
            run_dir=run_dir,
            task=config.task.without_constraints(),
            eval_task=scoring,
            reward_fn=reward_fn,
        )
    return job


def run_sweep(grid: SweepGrid, config: ExperimentConfig, root: Optional[str] = None,
              workers: int = 1, success_bar: float = 0.8) -> SweepReport:
    """Train and score every (cell, seed); failed cells are recorded, not fatal."""
    scoring = scored_task(config, grid.constraints)
    cell_config = replace(
        config,
        total_steps=grid.steps_per_cell,
        eval_period=grid.steps_per_cell,
        eval_episodes=grid.eval_episodes,
        save_checkpoints=False,
    )
    cells = grid.cells()
    jobs = []
    for i, (index, weights) in enumerate(cells):
        for seed in grid.seeds:
            run_dir = os.path.join(root, f"cell_{i}_seed_{seed}") if root else None
            jobs.append(Job(
                key=(i, seed),
                fn=_cell_job(cell_config, scoring, weights, seed, run_dir),
            ))
    LOG.info(f"Sweeping {grid.size} cells x {len(grid.seeds)} seeds over {list(grid.constraints)}")
    outcomes = JobRunner(workers, name="cell").run(jobs)

    out = []
    for outcome in outcomes:
        i, seed = outcome.key
        index, weights = cells[i]
        cell = SweepCell(index=index, weights=weights, seed=seed)
        final = outcome.value.final if outcome.ok else None
        if final is None:
            cell.error = str(outcome.error) if outcome.error else (outcome.value.error or "no evaluation")
        else:
            cell.mean_return = final.mean_return
            cell.success_rate = final.success_rate
            cell.rates = np.asarray(final.rates)
            cell.feasible = cmdp.is_feasible(cell.rates, scoring, config.feasibility_tolerance)
            cell.good = cell.feasible and cell.success_rate >= success_bar
        out.append(cell)

    report = SweepReport(grid=grid, task=scoring, success_bar=success_bar, cells=out)
    if root:
        utils.mkdir_p(root)
        report.write_csv(os.path.join(root, SWEEP_FILE))
    return report
