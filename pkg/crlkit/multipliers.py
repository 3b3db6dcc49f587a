"""Lagrange multipliers for the behavioral and success constraints.

In normalized mode the multipliers are a softmax over a fixed anchor a0 and
the base parameters z_1..z_{K+1}::

    lambda_k = exp(z_k) / (exp(a0) + sum_k' exp(z_k'))
    lambda_0 = 1 - sum_k lambda_k

so every multiplier, the reward weight included, stays inside (0, 1). Each
z_k descends on its own objective lambda_k * c_k through d(lambda_k)/d(z_k)
only, so the direction of a step on z_k depends on the sign of c_k alone. The
unnormalized ablation keeps raw multipliers, projected back onto
lambda_k >= 0 after every step, and a reward weight of 1.
"""
from dataclasses import dataclass
import logging
from typing import Tuple

from dataclasses_json import dataclass_json
import numpy as np

from crlkit import exception
from crlkit.cmdp import TaskSpec
from crlkit.numcore import optim
from crlkit.utils import trace


LOG = logging.getLogger("CRLKIT")

NORMALIZED = "normalized"
UNNORMALIZED = "unnormalized"
MODES = (NORMALIZED, UNNORMALIZED)
JACOBIANS = ("diagonal", "full")


@dataclass_json
@dataclass(frozen=True)
class MultiplierConfig:
    mode: str = NORMALIZED
    learning_rate: float = 0.03
    initial_value: float = 0.02
    jacobian: str = "diagonal"

    def __post_init__(self):
        if self.mode not in MODES:
            raise exception.ConfigurationError(f"Unknown multiplier mode '{self.mode}'")
        if self.jacobian not in JACOBIANS:
            raise exception.ConfigurationError(
                f"Unknown multiplier jacobian '{self.jacobian}'",
            )

    @classmethod
    def from_conf(cls, conf) -> "MultiplierConfig":
        return cls(
            mode=conf.mode,
            learning_rate=conf.learning_rate,
            initial_value=conf.initial_value,
            jacobian=conf.jacobian,
        )


def bootstrap_weight(lambda_0: float, lambda_success: float, use_bootstrap: bool) -> float:
    """Weight of the main reward once the success multiplier can lend to it."""
    if use_bootstrap:
        return max(lambda_0, lambda_success)
    return lambda_0


def softmax_with_anchor(z: np.ndarray, anchor: float = 0.0) -> Tuple[float, np.ndarray]:
    logits = np.concatenate(([anchor], np.asarray(z, dtype=np.float64)))
    e = np.exp(logits - logits.max())
    lam = e / e.sum()
    return float(lam[0]), lam[1:]


class MultiplierBank:
    """One multiplier per constraint, success constraint last."""

    def __init__(
        self,
        n_constraints: int,
        mode: str = NORMALIZED,
        initial_value: float = 0.02,
        learning_rate: float = 0.03,
        jacobian: str = "diagonal",
        anchor: float = 0.0,
    ):
        if mode not in MODES:
            raise exception.ConfigurationError(f"Unknown multiplier mode '{mode}'")
        if jacobian not in JACOBIANS:
            raise exception.ConfigurationError(f"Unknown multiplier jacobian '{jacobian}'")
        self.mode = mode
        self.jacobian = jacobian
        self.anchor = float(anchor)
        self.frozen = False
        self.n_updates = 0
        start = initial_value if mode == NORMALIZED else max(0.0, initial_value)
        self.params = np.full(n_constraints, float(start))
        self.adam = optim.AdamState.zeros_like([self.params], lr=learning_rate)

    @classmethod
    def from_config(cls, n_constraints, config) -> "MultiplierBank":
        return cls(
            n_constraints,
            mode=config.mode,
            initial_value=config.initial_value,
            learning_rate=config.learning_rate,
            jacobian=config.jacobian,
        )

    @property
    def n(self) -> int:
        return self.params.shape[0]

    @property
    def normalized(self) -> bool:
        return self.mode == NORMALIZED

    def normalized_lambdas(self) -> Tuple[float, np.ndarray]:
        if not self.normalized:
            raise exception.ConfigurationError(
                "normalized_lambdas() needs a bank in normalized mode",
            )
        return softmax_with_anchor(self.params, self.anchor)

    def lambdas(self) -> Tuple[float, np.ndarray]:
        """(lambda_0, lambda_1..lambda_{K+1}) in either mode."""
        if self.normalized:
            return self.normalized_lambdas()
        return 1.0, self.params.copy()

    def weights(self, task: TaskSpec) -> Tuple[float, np.ndarray, float]:
        """Policy-objective weights: (reward, behavioral, success)."""
        lambda_0, lam = self.lambdas()
        lam_behavior = lam[:task.k]
        lam_success = float(lam[task.k]) if task.has_success else 0.0
        reward_weight = bootstrap_weight(
            lambda_0, lam_success, task.use_bootstrap and task.has_success,
        )
        return reward_weight, lam_behavior, lam_success

    def objective_coefficients(self, rates: np.ndarray, task: TaskSpec) -> np.ndarray:
        """c_k such that the descent objective is sum_k lambda_k c_k."""
        thresholds = task.thresholds
        return np.where(task.lower_mask, rates - thresholds, thresholds - rates)

    def gradient(self, rates: np.ndarray, task: TaskSpec) -> np.ndarray:
        c = self.objective_coefficients(rates, task)
        if not self.normalized:
            return c
        _, lam = self.normalized_lambdas()
        if self.jacobian == "diagonal":
            return lam * (1.0 - lam) * c
        return lam * (c - np.dot(lam, c))

    @trace.trace
    def update(self, rates, task: TaskSpec) -> "MultiplierBank":
        """One Adam descent step on the multiplier objectives."""
        rates = np.asarray(rates, dtype=np.float64)
        if rates.shape != (self.n,) or task.n_indicators != self.n:
            raise exception.ConfigurationError(
                f"Multiplier bank of size {self.n} got rates of shape {rates.shape} "
                f"for a task with {task.n_indicators} constraints",
            )
        if np.any(rates < 0.0) or np.any(rates > 1.0):
            raise exception.InvalidArgumentError(f"Rates must lie in [0, 1], got {rates}")
        if self.frozen or self.n == 0:
            return self
        grad = self.gradient(rates, task)
        optim.adam_step([self.params], [grad], self.adam, where="multipliers")
        if not self.normalized:
            np.maximum(self.params, 0.0, out=self.params)
        if not np.all(np.isfinite(self.params)):
            raise exception.DivergenceError(
                f"Multiplier parameters went non-finite: {self.params}",
                where="multipliers",
            )
        self.n_updates += 1
        return self

    def stats(self, serializable=False) -> dict:
        lambda_0, lam = self.lambdas()
        return {
            "mode": self.mode,
            "updates": self.n_updates,
            "lambda_0": lambda_0,
            "lambdas": lam.tolist() if serializable else lam.copy(),
            "params": self.params.tolist() if serializable else self.params.copy(),
        }


def multiplier_update(bank: MultiplierBank, rates, task: TaskSpec) -> MultiplierBank:
    return bank.update(rates, task)
