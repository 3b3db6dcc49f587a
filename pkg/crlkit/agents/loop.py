"""The interaction and update schedule of the constrained learner.

Every environment step is pushed to the replay. Every ``update_period``
steps the critics of all heads and then the policy take one step on a
uniform minibatch, and every ``multiplier_update_period`` steps the
multipliers take one step on the rates of the most recent transitions,
with success counted over the episodes that ended among them.
"""
from dataclasses import dataclass
import logging
from typing import List, Optional

import numpy as np

from crlkit import cmdp, exception
from crlkit.agents.sac import SACAgent
from crlkit.multipliers import MultiplierBank
from crlkit.replay import ReplayBuffer, TransitionRecord


LOG = logging.getLogger("CRLKIT")


@dataclass
class StepMetrics:
    step: int
    reward: float
    episode_over: bool
    agent_updated: bool = False
    multipliers_updated: bool = False
    episode_return: Optional[float] = None
    rates: Optional[np.ndarray] = None


@dataclass
class MultiplierTrace:
    step: int
    rates: np.ndarray
    lambda_0: float
    lambdas: np.ndarray


class TrainingLoop:
    """Owns the agent, environment, replay and multipliers of one run."""

    def __init__(
        self,
        agent: SACAgent,
        env,
        buffer: ReplayBuffer,
        bank: MultiplierBank,
        task: cmdp.TaskSpec,
        rng: np.random.Generator,
        env_seed: Optional[int] = None,
    ):
        if agent.n_heads != 1 + task.n_indicators:
            raise exception.ConfigurationError(
                f"Agent has {agent.n_heads} heads for {task.n_indicators} constraints",
            )
        self.agent = agent
        self.env = env
        self.buffer = buffer
        self.bank = bank
        self.task = task
        self.rng = rng
        self.config = agent.config
        self.step = 0
        self.episodes = 0
        self.episode_return = 0.0
        # last episode success rate seen by the multipliers
        self.success_rate = 0.0
        self.observation = env.reset(seed=env_seed)
        self.multiplier_trace: List[MultiplierTrace] = []

    def policy_weights(self) -> np.ndarray:
        reward_weight, lam_behavior, lam_success = self.bank.weights(self.task)
        return self.agent.head_weights(reward_weight, lam_behavior, lam_success)

    def train_step(self) -> StepMetrics:
        self.step += 1
        mode = "random" if self.step <= self.config.random_steps else "explore"
        action = self.agent.act(self.observation, mode, self.rng)
        outcome = self.env.step(action)
        self.buffer.push(TransitionRecord(
            observation=self.observation,
            action=action,
            reward=outcome.reward,
            next_observation=outcome.next_observation,
            indicators=self.task.indicator_vector(outcome.indicators),
            # time limits keep bootstrapping
            done=outcome.done,
            episode_over=outcome.episode_over,
        ))
        self.episode_return += outcome.reward
        metrics = StepMetrics(
            step=self.step,
            reward=outcome.reward,
            episode_over=outcome.episode_over,
        )
        if outcome.episode_over:
            metrics.episode_return = self.episode_return
            self.episodes += 1
            self.episode_return = 0.0
            self.observation = self.env.reset()
        else:
            self.observation = outcome.next_observation

        if (self.step % self.config.update_period == 0
                and self.buffer.count >= self.config.min_buffer):
            batch = self.buffer.sample_uniform(self.config.batch_size, self.rng)
            self.agent.update(batch, self.policy_weights(), self.rng)
            metrics.agent_updated = True

        if (self.bank.n > 0
                and self.step % self.config.multiplier_update_period == 0
                and self.buffer.count >= self.config.multiplier_batch_size):
            window = self.buffer.sample_last(self.config.multiplier_batch_size)
            rates = cmdp.estimate_task_rates(
                window.indicators, window.episode_ends, self.task, self.success_rate,
            )
            if self.task.has_success:
                self.success_rate = float(rates[-1])
            self.bank.update(rates, self.task)
            lambda_0, lambdas = self.bank.lambdas()
            self.multiplier_trace.append(MultiplierTrace(
                step=self.step, rates=rates, lambda_0=lambda_0, lambdas=lambdas,
            ))
            metrics.multipliers_updated = True
            metrics.rates = rates
            LOG.debug(f"step {self.step} rates {rates} lambdas {lambdas}")
        return metrics

    def run(self, n_steps: int) -> None:
        for _ in range(n_steps):
            self.train_step()

    def save(self, path) -> None:
        """Agent, multipliers and the position in the schedule."""
        self.agent.save(path, bank=self.bank, extra={
            "step": np.array([float(self.step)]),
            "episodes": np.array([float(self.episodes)]),
            "success_rate": np.array([self.success_rate]),
        })

    def restore(self, path) -> None:
        """Continue from a checkpoint written by save().

        The replay starts out empty again, so updates wait until it holds
        ``min_buffer`` new transitions. The environment starts a new episode.
        """
        arrays = self.agent.load(path, bank=self.bank)
        if "step" not in arrays:
            raise exception.ConfigurationError(
                f"Checkpoint {path} doesn't record a training step to resume from",
            )
        self.step = int(arrays["step"][0])
        self.episodes = int(arrays["episodes"][0])
        self.success_rate = float(arrays["success_rate"][0])
        LOG.info(f"Resuming from step {self.step} of {path}")
