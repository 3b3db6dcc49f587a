"""Arena with an extra event whose meaning changes halfway through training.

Until ``switch_step`` environment steps have been taken (counted across
episodes) the ``diagnostic`` event fires on every step, so any threshold
below 1 is impossible to meet. Afterwards it only fires while the agent
recharges, which any policy can avoid.
"""
from dataclasses import dataclass
import logging
from typing import Optional, Tuple

from dataclasses_json import dataclass_json

from crlkit import exception
from crlkit.cmdp import StepOutcome
from crlkit.envs import arena


LOG = logging.getLogger("CRLKIT")

DIAGNOSTIC_EVENT = "diagnostic"


@dataclass_json
@dataclass(frozen=True)
class DiagnosticConfig:
    switch_step: int = 50000
    threshold: float = 0.01

    def __post_init__(self):
        if self.switch_step < 0:
            raise exception.ConfigurationError(
                f"switch_step must be >= 0, got {self.switch_step}",
            )

    @classmethod
    def from_conf(cls, conf) -> "DiagnosticConfig":
        return cls(switch_step=conf.switch_step, threshold=conf.threshold)


class DiagnosticArena(arena.MiniArena):

    def __init__(
        self,
        config: Optional[arena.ArenaConfig] = None,
        diagnostic: Optional[DiagnosticConfig] = None,
    ):
        self.diagnostic = diagnostic or DiagnosticConfig()
        self.global_step = 0
        super().__init__(config)

    @property
    def event_names(self) -> Tuple[str, ...]:
        return arena.BEHAVIOR_EVENTS + (DIAGNOSTIC_EVENT,)

    @property
    def impossible_phase(self) -> bool:
        return self.global_step < self.diagnostic.switch_step

    def set_global_step(self, step: int) -> None:
        """Align the phase with a training run, used by evaluation copies."""
        self.global_step = int(step)

    def behavior_events(self, action) -> dict:
        events = super().behavior_events(action)
        if self.impossible_phase:
            events[DIAGNOSTIC_EVENT] = 1
        else:
            events[DIAGNOSTIC_EVENT] = int(self.state.recharging)
        return events

    def step(self, action) -> StepOutcome:
        outcome = super().step(action)
        self.global_step += 1
        if self.global_step == self.diagnostic.switch_step:
            LOG.info(f"Diagnostic event switched to the avoidable phase at step {self.global_step}")
        return outcome
