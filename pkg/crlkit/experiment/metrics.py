"""Evaluation reports and the CSV logs they are appended to.

Every float is written with 17 significant digits so a CSV is an exact
record of the run and identical seeds give identical bytes.
"""
import csv
from dataclasses import dataclass, field
import logging
import os
from typing import List, Optional

import numpy as np

from crlkit import cmdp, exception
from crlkit.utils import fmt_float


LOG = logging.getLogger("CRLKIT")

METRICS_FILE = "metrics.csv"
MULTIPLIERS_FILE = "multipliers.csv"


@dataclass
class EvalReport:
    step: int
    mean_return: float
    success_rate: float
    rates: np.ndarray
    lambda_0: float
    lambdas: np.ndarray
    critic_losses: np.ndarray
    episodes: int = 0

    def feasible(self, task: cmdp.TaskSpec, tolerance: float = 0.0) -> bool:
        return cmdp.is_feasible(self.rates, task, tolerance)


def metric_columns(task: cmdp.TaskSpec) -> List[str]:
    cols = ["step", "return", "success_rate"]
    cols += [f"rate_{n}" for n in task.names]
    cols += ["lambda_0"] + [f"lambda_{n}" for n in task.names]
    cols += [f"loss_q{k}" for k in range(1 + task.n_indicators)]
    return cols


def multiplier_columns(task: cmdp.TaskSpec) -> List[str]:
    return (
        ["step"]
        + [f"rate_{n}" for n in task.names]
        + ["lambda_0"]
        + [f"lambda_{n}" for n in task.names]
    )


def _fmt(value) -> str:
    if isinstance(value, (int, np.integer)) and not isinstance(value, bool):
        return str(int(value))
    return fmt_float(value)


class CSVLog:
    """Rows appended to a CSV file as they arrive, kept in memory too.

    With ``keep_until`` the rows an earlier run wrote up to that step are
    kept, so a resumed run carries on the same file.
    """

    def __init__(self, path: Optional[str], columns: List[str],
                 keep_until: Optional[int] = None):
        self.path = path
        self.columns = columns
        self.rows: List[List[str]] = []
        if path is not None:
            if keep_until is not None:
                self.rows = self._earlier_rows(keep_until)
            with open(path, "w", newline="") as fp:
                writer = csv.writer(fp, lineterminator="\n")
                writer.writerow(columns)
                writer.writerows(self.rows)

    def _earlier_rows(self, keep_until: int) -> List[List[str]]:
        if not os.path.exists(self.path):
            return []
        with open(self.path, newline="") as fp:
            rows = list(csv.reader(fp))
        if not rows or rows[0] != self.columns:
            raise exception.ConfigurationError(
                f"{self.path} doesn't have the columns of this run, can't resume into it",
            )
        return [row for row in rows[1:] if int(row[0]) <= keep_until]

    def append_values(self, values) -> List[str]:
        if len(values) != len(self.columns):
            raise exception.ConfigurationError(
                f"Row of {len(values)} values for {len(self.columns)} columns",
            )
        row = [_fmt(v) for v in values]
        self.rows.append(row)
        if self.path is not None:
            with open(self.path, "a", newline="") as fp:
                csv.writer(fp, lineterminator="\n").writerow(row)
        return row

    def tail(self, n: int) -> List[dict]:
        return [dict(zip(self.columns, row)) for row in self.rows[-n:]]

    def __len__(self):
        return len(self.rows)


class MetricLog(CSVLog):
    """One row per evaluation."""

    def __init__(self, run_dir: Optional[str], task: cmdp.TaskSpec,
                 keep_until: Optional[int] = None):
        path = os.path.join(run_dir, METRICS_FILE) if run_dir else None
        super().__init__(path, metric_columns(task), keep_until)
        self.task = task
        self.reports: List[EvalReport] = []

    def append(self, report: EvalReport) -> None:
        values = (
            [report.step, report.mean_return, report.success_rate]
            + list(report.rates)
            + [report.lambda_0]
            + list(report.lambdas)
            + list(report.critic_losses)
        )
        self.append_values(values)
        self.reports.append(report)


class MultiplierLog(CSVLog):
    """One row per multiplier update."""

    def __init__(self, run_dir: Optional[str], task: cmdp.TaskSpec,
                 keep_until: Optional[int] = None):
        path = os.path.join(run_dir, MULTIPLIERS_FILE) if run_dir else None
        super().__init__(path, multiplier_columns(task), keep_until)

    def append(self, trace) -> None:
        self.append_values(
            [trace.step] + list(trace.rates) + [trace.lambda_0] + list(trace.lambdas),
        )


@dataclass
class RolloutStats:
    returns: List[float] = field(default_factory=list)
    successes: List[bool] = field(default_factory=list)
    indicator_rows: List[np.ndarray] = field(default_factory=list)
    episode_ends: List[bool] = field(default_factory=list)
    task: Optional[cmdp.TaskSpec] = None

    @property
    def rates(self) -> np.ndarray:
        rows = np.stack(self.indicator_rows)
        if self.task is None:
            return cmdp.estimate_cost_rates(rows)
        return cmdp.estimate_task_rates(rows, self.episode_ends, self.task)


def rollout(policy, env, task: cmdp.TaskSpec, n_episodes: int, seeds,
            rng=None, mode="greedy") -> RolloutStats:
    """Run whole episodes, one reset seed per episode."""
    out = RolloutStats(task=task)
    for i in range(n_episodes):
        observation = env.reset(seed=seeds[i])
        total = 0.0
        success = False
        while True:
            if hasattr(policy, "act"):
                action = policy.act(observation, mode, rng)
            else:
                action = policy(observation)
            outcome = env.step(action)
            total += outcome.reward
            out.indicator_rows.append(task.indicator_vector(outcome.indicators))
            out.episode_ends.append(outcome.episode_over)
            if outcome.episode_over:
                success = outcome.done
                break
            observation = outcome.next_observation
        out.returns.append(total)
        out.successes.append(success)
    return out
