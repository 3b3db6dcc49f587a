"""Fixed-capacity FIFO replay of transitions.

Storage works like a ring buffer that starts out not full: the cursor only
wraps once ``capacity`` records have been pushed, after which the oldest
record is overwritten first.
"""
from dataclasses import dataclass
import logging
from typing import Optional

import numpy as np

from crlkit import exception


LOG = logging.getLogger("CRLKIT")


@dataclass
class TransitionRecord:
    observation: np.ndarray
    action: np.ndarray
    reward: float
    next_observation: np.ndarray
    indicators: np.ndarray
    done: bool
    # terminal or time limit; ``done`` alone marks the goal
    episode_over: bool = False


@dataclass
class Batch:
    observations: np.ndarray
    actions: np.ndarray
    rewards: np.ndarray
    next_observations: np.ndarray
    indicators: np.ndarray
    dones: np.ndarray
    slots: np.ndarray
    episode_ends: Optional[np.ndarray] = None

    def __len__(self):
        return self.rewards.shape[0]

    def record(self, i) -> TransitionRecord:
        return TransitionRecord(
            observation=self.observations[i],
            action=self.actions[i],
            reward=float(self.rewards[i]),
            next_observation=self.next_observations[i],
            indicators=self.indicators[i],
            done=bool(self.dones[i]),
            episode_over=bool(self.episode_ends[i]) if self.episode_ends is not None else False,
        )


class ReplayBuffer:
    """Transitions with uniform and last-N sampling."""

    def __init__(self, capacity: int, obs_dim: int, act_dim: int, n_indicators: int):
        if capacity < 1:
            raise exception.ConfigurationError(f"Replay capacity must be >= 1, got {capacity}")
        self.capacity = int(capacity)
        self.obs_dim = obs_dim
        self.act_dim = act_dim
        self.n_indicators = n_indicators
        self.cursor = 0
        self.count = 0
        self.total_pushed = 0
        self._obs = np.zeros((capacity, obs_dim))
        self._act = np.zeros((capacity, act_dim))
        self._rew = np.zeros(capacity)
        self._next_obs = np.zeros((capacity, obs_dim))
        self._ind = np.zeros((capacity, n_indicators))
        self._done = np.zeros(capacity, dtype=bool)
        self._end = np.zeros(capacity, dtype=bool)

    def __len__(self):
        return self.count

    @property
    def full(self) -> bool:
        return self.count == self.capacity

    def push(self, record: TransitionRecord) -> None:
        indicators = np.asarray(record.indicators, dtype=np.float64)
        if indicators.shape != (self.n_indicators,):
            raise exception.ConfigurationError(
                f"Transition carries {indicators.shape} indicators, "
                f"buffer expects {self.n_indicators}",
            )
        i = self.cursor
        self._obs[i] = record.observation
        self._act[i] = record.action
        self._rew[i] = record.reward
        self._next_obs[i] = record.next_observation
        self._ind[i] = indicators
        self._done[i] = record.done
        self._end[i] = record.done or record.episode_over
        self.cursor = (self.cursor + 1) % self.capacity
        self.count = min(self.count + 1, self.capacity)
        self.total_pushed += 1

    def _gather(self, slots) -> Batch:
        return Batch(
            observations=self._obs[slots],
            actions=self._act[slots],
            rewards=self._rew[slots],
            next_observations=self._next_obs[slots],
            indicators=self._ind[slots],
            dones=self._done[slots],
            slots=slots,
            episode_ends=self._end[slots],
        )

    def _check(self, n):
        if n < 1:
            raise exception.InvalidArgumentError(f"Batch size must be >= 1, got {n}")
        if self.count < n:
            raise exception.InsufficientDataError(n, self.count)

    def sample_uniform(self, n: int, rng: np.random.Generator) -> Batch:
        """n records i.i.d. uniform over the stored ones, with replacement."""
        self._check(n)
        slots = rng.integers(0, self.count, size=n)
        return self._gather(slots)

    def sample_last(self, n: int) -> Batch:
        """The n most recently pushed records, oldest first."""
        self._check(n)
        slots = (self.cursor - n + np.arange(n)) % self.capacity
        return self._gather(slots)

    def get(self) -> Batch:
        """Everything stored, oldest first."""
        return self.sample_last(self.count) if self.count else self._gather(np.arange(0))

    def stats(self, serializable=False) -> dict:
        return {
            "count": self.count,
            "capacity": self.capacity,
            "total_pushed": self.total_pushed,
        }
