"""Constraint and task specification for indicator-cost CMDPs."""
from dataclasses import dataclass, field
import logging
from typing import List, Mapping, Optional, Sequence

from dataclasses_json import dataclass_json
import numpy as np

from crlkit import exception


LOG = logging.getLogger("CRLKIT")

UPPER_BOUND = "upper_bound"
LOWER_BOUND = "lower_bound"
KINDS = (UPPER_BOUND, LOWER_BOUND)


@dataclass_json
@dataclass(frozen=True)
class ConstraintSpec:
    """A bound on the rate of one indicator event.

    ``threshold`` is the desired probability of the event at any visited
    state-action pair. ``invert`` constrains ``1 - indicator`` so the
    opposite behavior can be asked for without flipping the bound.
    """
    name: str
    kind: str = UPPER_BOUND
    threshold: float = 0.0
    discount: Optional[float] = None
    indicator: Optional[str] = None
    invert: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise exception.ConfigurationError(
                f"Constraint '{self.name}' has kind '{self.kind}', expected one of {KINDS}",
            )
        if self.threshold is None or not 0.0 <= self.threshold <= 1.0:
            raise exception.ConfigurationError(
                f"Constraint '{self.name}' threshold {self.threshold} is not a probability",
            )
        if self.discount is not None and not 0.0 <= self.discount < 1.0:
            raise exception.ConfigurationError(
                f"Constraint '{self.name}' critic discount {self.discount} not in [0, 1)",
            )

    @property
    def source(self) -> str:
        return self.indicator or self.name

    def cost(self, indicators: Mapping[str, int]) -> int:
        try:
            event = int(indicators[self.source])
        except KeyError:
            raise exception.ConfigurationError(
                f"Constraint '{self.name}' reads indicator '{self.source}' "
                f"which the environment doesn't emit ({sorted(indicators)})",
            )
        return 1 - event if self.invert else event


@dataclass_json
@dataclass(frozen=True)
class TaskSpec:
    """K behavioral upper bounds plus an optional success lower bound.

    In indicator vectors the behavioral constraints come first, in the order
    given, and the success event (if any) is last. Head 0 of the agent is
    the main reward and has no threshold.
    """
    constraints: List[ConstraintSpec] = field(default_factory=list)
    success: Optional[ConstraintSpec] = None
    gamma: float = 0.9
    use_bootstrap: bool = True

    def __post_init__(self):
        names = [c.name for c in self.all_constraints]
        if len(set(names)) != len(names):
            raise exception.ConfigurationError(f"Constraint names must be unique: {names}")
        for c in self.constraints:
            if c.kind != UPPER_BOUND:
                raise exception.ConfigurationError(
                    f"Behavioral constraint '{c.name}' must be an upper bound; "
                    "use invert=true to ask for the opposite behavior",
                )
        if self.success is not None and self.success.kind != LOWER_BOUND:
            raise exception.ConfigurationError(
                f"Success constraint '{self.success.name}' must be a lower bound",
            )
        if not 0.0 <= self.gamma < 1.0:
            raise exception.ConfigurationError(f"Reward discount {self.gamma} not in [0, 1)")

    @property
    def k(self) -> int:
        """Number of behavioral constraints."""
        return len(self.constraints)

    @property
    def has_success(self) -> bool:
        return self.success is not None

    @property
    def all_constraints(self) -> List[ConstraintSpec]:
        out = list(self.constraints)
        if self.success is not None:
            out.append(self.success)
        return out

    @property
    def n_indicators(self) -> int:
        return len(self.all_constraints)

    @property
    def names(self) -> List[str]:
        return [c.name for c in self.all_constraints]

    @property
    def thresholds(self) -> np.ndarray:
        return np.array([c.threshold for c in self.all_constraints], dtype=np.float64)

    @property
    def lower_mask(self) -> np.ndarray:
        return np.array(
            [c.kind == LOWER_BOUND for c in self.all_constraints], dtype=bool,
        )

    @property
    def discounts(self) -> np.ndarray:
        """Critic discount per indicator, falling back to the reward discount."""
        return np.array(
            [self.gamma if c.discount is None else c.discount for c in self.all_constraints],
            dtype=np.float64,
        )

    def indicator_vector(self, indicators: Mapping[str, int]) -> np.ndarray:
        return np.array(
            [c.cost(indicators) for c in self.all_constraints], dtype=np.float64,
        )

    def without_constraints(self) -> "TaskSpec":
        return TaskSpec(constraints=[], success=None, gamma=self.gamma, use_bootstrap=False)


@dataclass
class StepOutcome:
    """What one environment step hands back.

    ``done`` marks a terminal transition (the goal was reached) and is what
    the critics use to stop bootstrapping. ``truncated`` marks the time limit.
    """
    next_observation: np.ndarray
    reward: float
    indicators: Mapping[str, int]
    done: bool = False
    truncated: bool = False

    @property
    def episode_over(self) -> bool:
        return self.done or self.truncated


def estimate_cost_rates(batch: Sequence[Sequence[float]]) -> np.ndarray:
    """Batch mean of every indicator: the estimate of each event rate."""
    arr = np.asarray(batch, dtype=np.float64)
    if arr.ndim == 1 and arr.size:
        arr = arr[:, None]
    if arr.ndim != 2 or arr.shape[0] == 0:
        raise exception.InvalidArgumentError(
            "Can't estimate constraint rates from an empty batch",
        )
    if not np.all((arr == 0.0) | (arr == 1.0)):
        raise exception.InvalidArgumentError("Indicator entries must be exactly 0 or 1")
    return arr.mean(axis=0)


def estimate_task_rates(
    indicators: Sequence[Sequence[float]],
    episode_ends: Sequence[bool],
    task: TaskSpec,
    fallback_success: float = 0.0,
) -> np.ndarray:
    """Constraint rates of a window of consecutive transitions.

    Behavioral rates are per step. The success event fires at most once per
    episode, on its last step, so its rate is the share of the episodes that
    ended inside the window which reached the goal. A window in which no
    episode ended reports ``fallback_success``.
    """
    rates = estimate_cost_rates(indicators)
    if rates.shape != (task.n_indicators,):
        raise exception.ConfigurationError(
            f"Got {rates.shape[0]} indicator columns for {task.n_indicators} constraints",
        )
    if not task.has_success:
        return rates
    arr = np.asarray(indicators, dtype=np.float64).reshape(-1, task.n_indicators)
    ends = np.asarray(episode_ends, dtype=bool)
    if ends.shape != (arr.shape[0],):
        raise exception.InvalidArgumentError(
            f"Got {ends.shape} episode end flags for {arr.shape[0]} transitions",
        )
    if ends.any():
        rates[-1] = arr[ends, -1].mean()
    else:
        rates[-1] = fallback_success
    return rates


def is_feasible(rates: Sequence[float], task: TaskSpec, tolerance: float = 0.0) -> bool:
    """Every upper bound under its threshold, every lower bound above it."""
    rates = np.asarray(rates, dtype=np.float64)
    if rates.shape != (task.n_indicators,):
        raise exception.ConfigurationError(
            f"Got {rates.shape[0] if rates.ndim else 0} rates for "
            f"{task.n_indicators} constraints",
        )
    thresholds = task.thresholds
    lower = task.lower_mask
    ok_upper = rates[~lower] <= thresholds[~lower] + tolerance
    ok_lower = rates[lower] >= thresholds[lower] - tolerance
    return bool(np.all(ok_upper) and np.all(ok_lower))


def feasibility_by_constraint(rates, task: TaskSpec, tolerance: float = 0.0) -> dict:
    """Per-constraint version of is_feasible, for reports."""
    out = {}
    for rate, c in zip(np.asarray(rates, dtype=np.float64), task.all_constraints):
        if c.kind == UPPER_BOUND:
            out[c.name] = bool(rate <= c.threshold + tolerance)
        else:
            out[c.name] = bool(rate >= c.threshold - tolerance)
    return out
