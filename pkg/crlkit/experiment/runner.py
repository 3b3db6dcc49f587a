"""Training, evaluation and the multiplier-normalization diagnostic."""
from dataclasses import dataclass, field, replace
import logging
import os
from typing import Dict, List, Optional

import numpy as np
import pandas as pd

from crlkit import cmdp, exception, stats, utils
from crlkit.agents import SACAgent, TrainingLoop, load_policy
from crlkit.envs import make_env
from crlkit.experiment.config import ExperimentConfig
from crlkit.experiment.metrics import (
    METRICS_FILE, EvalReport, MetricLog, MultiplierLog, rollout,
)
from crlkit.log import log as crl_log
from crlkit.multipliers import NORMALIZED, UNNORMALIZED, MultiplierBank
from crlkit.numcore import checkpoint
from crlkit.replay import ReplayBuffer
from crlkit.threads import Job, JobRunner
from crlkit.utils import json as crl_json


LOG = logging.getLogger("CRLKIT")

CONFIG_FILE = "config.json"
CHECKPOINT_FILE = "checkpoint.bin"
DIVERGENCE_FILE = "divergence.json"
SUMMARY_FILE = "summary.csv"
COMPARISON_FILE = "comparison.csv"
POSTMORTEM_ROWS = 100


@dataclass
class RunResult:
    seed: int
    run_dir: Optional[str]
    reports: List[EvalReport] = field(default_factory=list)
    multiplier_trace: list = field(default_factory=list)
    diverged: bool = False
    error: Optional[str] = None

    @property
    def final(self) -> Optional[EvalReport]:
        """Reported results are those of the last evaluation."""
        return self.reports[-1] if self.reports else None


def eval_seeds(seed, n_episodes) -> List[int]:
    return [utils.derive_seed(seed, "eval", i) for i in range(n_episodes)]


def build_loop(config: ExperimentConfig, seed: int, task: Optional[cmdp.TaskSpec] = None,
               env=None) -> TrainingLoop:
    """Everything one run owns, each piece on its own random stream."""
    task = task or config.task
    if env is None:
        env = make_env(replace(config.arena, seed=utils.derive_seed(seed, "env")), config.diagnostic)
    agent = SACAgent.for_task(
        task, env.obs_dim, env.act_dim, config.agent, seed=utils.derive_seed(seed, "agent"),
    )
    capacity = min(config.agent.buffer_size, max(config.total_steps, 1))
    buffer = ReplayBuffer(capacity, env.obs_dim, env.act_dim, task.n_indicators)
    bank = MultiplierBank.from_config(task.n_indicators, config.multipliers)
    return TrainingLoop(
        agent, env, buffer, bank, task,
        rng=utils.make_rng(seed, "train"),
        env_seed=utils.derive_seed(seed, "env", "reset"),
    )


def evaluate_policy(policy, config: ExperimentConfig, task: cmdp.TaskSpec,
                    n_episodes: int, seed: int, step: int = 0,
                    global_step: Optional[int] = None) -> EvalReport:
    """Greedy episodes on a fresh environment.

    Behavioral rates are averaged over every step of every episode. The
    success rate and the return are averaged over episodes.
    """
    env = make_env(config.arena, config.diagnostic)
    if global_step is not None and hasattr(env, "set_global_step"):
        env.set_global_step(global_step)
    out = rollout(policy, env, task, n_episodes, eval_seeds(seed, n_episodes))
    return EvalReport(
        step=step,
        mean_return=float(np.mean(out.returns)),
        success_rate=float(np.mean(out.successes)),
        rates=out.rates,
        lambda_0=float("nan"),
        lambdas=np.full(task.n_indicators, np.nan),
        critic_losses=np.full(1 + task.n_indicators, np.nan),
        episodes=n_episodes,
    )


def evaluate_loop(loop: TrainingLoop, config: ExperimentConfig, seed: int,
                  collector, n_episodes: Optional[int] = None,
                  task: Optional[cmdp.TaskSpec] = None) -> EvalReport:
    """Evaluate a frozen clone of the current policy."""
    task = task or loop.task
    report = evaluate_policy(
        loop.agent.policy.copy(), config, task,
        n_episodes or config.eval_episodes, seed,
        step=loop.step, global_step=loop.step,
    )
    snapshot = collector.collect()
    report.lambda_0 = float(snapshot["multipliers"]["lambda_0"])
    report.lambdas = np.asarray(snapshot["multipliers"]["lambdas"])
    report.critic_losses = np.asarray(snapshot["agent"]["critic_losses"])
    if report.lambdas.shape[0] != task.n_indicators:
        # scored on a different task than trained on (sweep cells)
        report.lambdas = np.full(task.n_indicators, np.nan)
        report.critic_losses = np.full(1 + task.n_indicators, np.nan)
    return report


def evaluate(checkpoint_path, config: ExperimentConfig, n_episodes: Optional[int] = None,
             seed: Optional[int] = None) -> EvalReport:
    """Greedy evaluation of a saved agent."""
    env = make_env(config.arena, config.diagnostic)
    policy = load_policy(checkpoint_path, env.obs_dim, env.act_dim, config.agent)
    seed = config.seeds[0] if seed is None else seed
    report = evaluate_policy(
        policy, config, config.task, n_episodes or config.eval_episodes, seed,
    )
    _, arrays = checkpoint.load(checkpoint_path)
    if "multiplier_params" in arrays:
        bank = MultiplierBank.from_config(config.task.n_indicators, config.multipliers)
        if arrays["multiplier_params"].shape != bank.params.shape:
            raise exception.ConfigurationError(
                f"Checkpoint has {arrays['multiplier_params'].shape[0]} multipliers, "
                f"the task declares {bank.n} constraints",
            )
        bank.params[...] = arrays["multiplier_params"]
        report.lambda_0, report.lambdas = bank.lambdas()
    return report


def write_postmortem(run_dir, seed, step, ex: exception.DivergenceError) -> str:
    path = os.path.join(run_dir, DIVERGENCE_FILE)
    crl_json.dump(
        {
            "seed": seed,
            "step": step,
            "where": ex.where,
            "message": ex.message,
            "rows": ex.rows,
            "log": crl_log.logging_queue.latest(),
        },
        path,
    )
    LOG.error(f"Run diverged at step {step} ({ex.where}), post-mortem in {path}")
    return path


def run_training(config: ExperimentConfig, seed: Optional[int] = None,
                 run_dir: Optional[str] = None, raise_on_divergence: bool = True,
                 task: Optional[cmdp.TaskSpec] = None,
                 eval_task: Optional[cmdp.TaskSpec] = None,
                 reward_fn=None, resume: Optional[str] = None) -> RunResult:
    """Train one seed, evaluating every ``eval_period`` steps.

    ``task``/``eval_task`` let the sweep train on a penalty reward without
    constraints while scoring the real behavior events. ``reward_fn`` maps
    (reward, indicators) to the reward the agent sees. ``resume`` names a
    checkpoint of this run to carry on from.
    """
    seed = config.seeds[0] if seed is None else seed
    task = task or config.task
    eval_task = eval_task or task
    if run_dir is not None:
        utils.mkdir_p(run_dir)
        crl_json.dump(config.to_dict(), os.path.join(run_dir, CONFIG_FILE))

    env = None
    if reward_fn is not None:
        env = RewardWrapper(
            make_env(replace(config.arena, seed=utils.derive_seed(seed, "env")), config.diagnostic),
            reward_fn,
        )
    loop = build_loop(config, seed, task=task, env=env)
    keep_until = None
    if resume is not None:
        loop.restore(resume)
        if loop.step >= config.total_steps:
            raise exception.ConfigurationError(
                f"Checkpoint {resume} is at step {loop.step}, "
                f"nothing left of {config.total_steps} steps",
            )
        keep_until = loop.step
    metric_log = MetricLog(run_dir, eval_task, keep_until)
    multiplier_log = MultiplierLog(run_dir, task, keep_until)
    checkpoint_path = (
        os.path.join(run_dir, CHECKPOINT_FILE)
        if config.save_checkpoints and run_dir is not None else None
    )
    collector = stats.run_collector(loop)
    result = RunResult(seed=seed, run_dir=run_dir)
    LOG.info(
        f"Training seed {seed} from step {loop.step} to {config.total_steps}, "
        f"{task.k} behavioral constraints, success constraint: {task.has_success}, "
        f"multipliers {loop.bank.mode}",
    )
    try:
        while loop.step < config.total_steps:
            metrics = loop.train_step()
            if metrics.multipliers_updated:
                multiplier_log.append(loop.multiplier_trace[-1])
            if loop.step % config.eval_period == 0 or loop.step == config.total_steps:
                report = evaluate_loop(loop, config, seed, collector, task=eval_task)
                metric_log.append(report)
                LOG.info(
                    f"seed {seed} step {loop.step}: return {report.mean_return:.3f} "
                    f"success {report.success_rate:.2f} rates {np.round(report.rates, 4)}",
                )
                if checkpoint_path is not None:
                    loop.save(checkpoint_path)
    except exception.DivergenceError as ex:
        ex.rows = metric_log.tail(POSTMORTEM_ROWS)
        if run_dir is not None:
            write_postmortem(run_dir, seed, loop.step, ex)
        result.reports = metric_log.reports
        result.multiplier_trace = loop.multiplier_trace
        result.diverged = True
        result.error = ex.message
        if raise_on_divergence:
            raise
        return result

    result.reports = metric_log.reports
    result.multiplier_trace = loop.multiplier_trace
    return result


class RewardWrapper:
    """Replaces the environment reward by ``reward_fn(reward, indicators)``."""

    def __init__(self, env, reward_fn):
        self.env = env
        self.reward_fn = reward_fn

    def __getattr__(self, name):
        return getattr(self.env, name)

    def reset(self, seed=None):
        return self.env.reset(seed=seed)

    def step(self, action) -> cmdp.StepOutcome:
        outcome = self.env.step(action)
        outcome.reward = float(self.reward_fn(outcome.reward, outcome.indicators))
        return outcome


def seed_dir(root, seed) -> str:
    return os.path.join(root, f"seed_{seed}")


def summarize_seeds(results: List[RunResult], root) -> Optional[pd.DataFrame]:
    """Mean and standard error of every metric per evaluation step."""
    frames = []
    for r in results:
        if r.run_dir is None or r.diverged:
            continue
        df = pd.read_csv(os.path.join(r.run_dir, METRICS_FILE))
        df["seed"] = r.seed
        frames.append(df)
    if not frames:
        return None
    data = pd.concat(frames, ignore_index=True)
    value_cols = [c for c in data.columns if c not in ("step", "seed")]
    grouped = data.groupby("step")[value_cols]
    mean = grouped.mean().add_suffix("_mean")
    stderr = grouped.sem(ddof=1).add_suffix("_stderr")
    summary = pd.concat([mean, stderr], axis=1)
    summary.insert(0, "n_seeds", data.groupby("step")["seed"].nunique())
    summary = summary.reset_index()
    summary.to_csv(os.path.join(root, SUMMARY_FILE), index=False, float_format="%.17g")
    return summary


@dataclass
class TrainSummary:
    root: str
    results: Dict[int, RunResult]
    errors: Dict[int, BaseException]

    @property
    def diverged(self) -> bool:
        return any(isinstance(e, exception.DivergenceError) for e in self.errors.values())


def train_all(config: ExperimentConfig, root: Optional[str] = None,
              resume: Optional[str] = None) -> TrainSummary:
    """Every configured seed as an independent job.

    A ``resume`` checkpoint belongs to one run, so it needs a single seed.
    """
    if resume is not None and len(config.seeds) != 1:
        raise exception.ConfigurationError(
            f"Resuming from {resume} needs a single seed, got {config.seeds}",
        )
    root = root or os.path.join(config.output_dir, config.name)
    utils.mkdir_p(root)
    jobs = [
        Job(key=seed, fn=_training_job(config, seed, seed_dir(root, seed), resume))
        for seed in config.seeds
    ]
    outcomes = JobRunner(config.workers, name="seed").run(jobs)
    results = {o.key: o.value for o in outcomes if o.ok}
    errors = {o.key: o.error for o in outcomes if not o.ok}
    if len(config.seeds) > 1:
        summarize_seeds([results[s] for s in sorted(results)], root)
    return TrainSummary(root=root, results=results, errors=errors)


def _training_job(config, seed, run_dir, resume=None):
    def job():
        return run_training(config, seed=seed, run_dir=run_dir, resume=resume)
    return job


@dataclass
class DiagnosticResult:
    root: str
    runs: Dict[str, RunResult]


def comparison_rows(mode, result: RunResult) -> List[dict]:
    rows = []
    for r in result.reports:
        lambdas = np.asarray(r.lambdas)
        rows.append({
            "mode": mode,
            "step": r.step,
            "return": r.mean_return,
            "success_rate": r.success_rate,
            "max_lambda": float(np.max(lambdas)) if lambdas.size else float("nan"),
            "max_critic_loss": float(np.nanmax(r.critic_losses)),
        })
    return rows


def run_diagnostic(config: ExperimentConfig, root: Optional[str] = None) -> DiagnosticResult:
    """Both multiplier modes on the two-phase diagnostic arena, same seed.

    A divergence of the unnormalized run is an outcome, not a failure.
    """
    if config.diagnostic is None:
        raise exception.ConfigurationError(
            "The diagnostic needs [diagnostic] enabled = true",
        )
    root = root or os.path.join(config.output_dir, config.name)
    utils.mkdir_p(root)
    seed = config.seeds[0]
    runs = {}
    for mode in (NORMALIZED, UNNORMALIZED):
        mode_config = replace(config, multipliers=replace(config.multipliers, mode=mode))
        runs[mode] = run_training(
            mode_config, seed=seed, run_dir=os.path.join(root, mode),
            raise_on_divergence=False,
        )
        if runs[mode].diverged:
            LOG.warning(f"{mode} multipliers diverged: {runs[mode].error}")

    rows = []
    for mode, result in runs.items():
        rows += comparison_rows(mode, result)
    pd.DataFrame(
        rows,
        columns=["mode", "step", "return", "success_rate", "max_lambda", "max_critic_loss"],
    ).to_csv(os.path.join(root, COMPARISON_FILE), index=False, float_format="%.17g")
    return DiagnosticResult(root=root, runs=runs)
