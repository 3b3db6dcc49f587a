"""MiniArena: a small continuous 2D navigation task with behavior events.

The agent moves in the unit square towards a goal. Every step it reports
four behavioral events (``in_lava``, ``not_looking``, ``above_speed``,
``below_energy``) plus ``success`` when the goal is reached.

Action, 4 entries in [-1, 1]:

    ===  =========  ============================================
    0-1  ax, ay     acceleration command
    2    dheading   turn command
    3    recharge   > 0 stops the agent for the step and recharges
    ===  =========  ============================================

Observation, see ``MiniArena.observation_spec()`` for the layout.
"""
import csv
from dataclasses import dataclass, field
import logging
import math
from typing import List, Optional, Tuple

from dataclasses_json import dataclass_json
from gymnasium import spaces
import numpy as np

from crlkit import exception
from crlkit.cmdp import StepOutcome
from crlkit.utils import fmt_float


LOG = logging.getLogger("CRLKIT")

BEHAVIOR_EVENTS = ("in_lava", "not_looking", "above_speed", "below_energy")
SUCCESS_EVENT = "success"
ACTION_DIM = 4
LAVA_GRID_SPACING = 0.05
SPAWN_MARGIN = 0.05


@dataclass_json
@dataclass(frozen=True)
class ArenaConfig:
    episode_length: int = 150
    goal_radius: float = 0.05
    lava: List[Tuple[float, float, float, float]] = field(
        default_factory=lambda: [(0.35, 0.0, 0.45, 0.4), (0.55, 0.6, 0.65, 1.0)],
    )
    marker: Tuple[float, float] = (0.5, 0.5)
    fov_half_angle: float = math.pi / 4
    v_max: float = 0.25
    speed_cap: float = 0.5
    accel: float = 1.5
    drag: float = 1.0
    turn_rate: float = 6.0
    dt: float = 0.1
    energy_drain: float = 0.6
    recharge_rate: float = 0.1
    min_energy: float = 0.2
    initial_energy_low: float = 0.3
    shaping: float = 0.3
    seed: int = 0

    def __post_init__(self):
        if self.episode_length < 1:
            raise exception.ConfigurationError(
                f"episode_length must be >= 1, got {self.episode_length}",
            )
        if not 0.0 < self.goal_radius < 0.5:
            raise exception.ConfigurationError(
                f"goal_radius must be in (0, 0.5), got {self.goal_radius}",
            )
        for rect in self.lava:
            if len(rect) != 4 or rect[0] > rect[2] or rect[1] > rect[3]:
                raise exception.ConfigurationError(
                    f"Lava rectangle {rect} is not x0,y0,x1,y1 with x0<=x1 and y0<=y1",
                )
        if self.dt <= 0.0:
            raise exception.ConfigurationError(f"dt must be positive, got {self.dt}")

    @classmethod
    def from_conf(cls, conf, seed=0) -> "ArenaConfig":
        """Build from the [arena] option group."""
        try:
            lava = [
                tuple(float(v) for v in rect.split(","))
                for rect in conf.lava
            ]
            marker = tuple(float(v) for v in conf.marker)
        except ValueError as ex:
            raise exception.ConfigurationError(f"Bad [arena] geometry: {ex}")
        if len(marker) != 2:
            raise exception.ConfigurationError(f"[arena] marker needs x,y, got {conf.marker}")
        return cls(
            episode_length=conf.episode_length,
            goal_radius=conf.goal_radius,
            lava=lava,
            marker=marker,
            fov_half_angle=conf.fov_half_angle,
            v_max=conf.v_max,
            speed_cap=conf.speed_cap,
            accel=conf.accel,
            drag=conf.drag,
            turn_rate=conf.turn_rate,
            dt=conf.dt,
            energy_drain=conf.energy_drain,
            recharge_rate=conf.recharge_rate,
            min_energy=conf.min_energy,
            initial_energy_low=conf.initial_energy_low,
            shaping=conf.shaping,
            seed=seed,
        )


@dataclass
class ArenaState:
    position: np.ndarray
    velocity: np.ndarray
    heading: float
    energy: float
    step: int
    goal: np.ndarray
    recharging: bool = False


@dataclass(frozen=True)
class ObservationField:
    name: str
    size: int
    low: float
    high: float


@dataclass(frozen=True)
class ObservationSpec:
    fields: Tuple[ObservationField, ...]

    @property
    def dim(self) -> int:
        return sum(f.size for f in self.fields)

    def slices(self) -> dict:
        out, start = {}, 0
        for f in self.fields:
            out[f.name] = slice(start, start + f.size)
            start += f.size
        return out

    def space(self) -> spaces.Box:
        low = np.concatenate([np.full(f.size, f.low) for f in self.fields])
        high = np.concatenate([np.full(f.size, f.high) for f in self.fields])
        return spaces.Box(low=low, high=high, dtype=np.float64)


def wrap_angle(angle: float) -> float:
    """Map an angle to [-pi, pi)."""
    return (angle + math.pi) % (2.0 * math.pi) - math.pi


def in_rect(point, rect) -> bool:
    x, y = point
    return rect[0] <= x <= rect[2] and rect[1] <= y <= rect[3]


class MiniArena:
    """Deterministic dynamics, seeded initial states."""

    def __init__(self, config: Optional[ArenaConfig] = None):
        self.config = config or ArenaConfig()
        self.rng = np.random.default_rng(self.config.seed)
        self.state: Optional[ArenaState] = None
        self._event_sums = np.zeros(len(self.event_names))
        self._warned_clip = False
        self._obs_spec = self._build_observation_spec()
        self.trajectory: Optional[List[dict]] = None

    # Metadata

    @property
    def event_names(self) -> Tuple[str, ...]:
        """Behavioral events in observation order."""
        return BEHAVIOR_EVENTS

    @property
    def indicator_names(self) -> Tuple[str, ...]:
        return self.event_names + (SUCCESS_EVENT,)

    def _build_observation_spec(self) -> ObservationSpec:
        return ObservationSpec(fields=(
            ObservationField("position", 2, 0.0, 1.0),
            ObservationField("goal_relative", 2, -1.0, 1.0),
            ObservationField("goal_distance", 1, 0.0, math.sqrt(2.0)),
            ObservationField("velocity", 2, -1.0, 1.0),
            ObservationField("heading", 2, -1.0, 1.0),
            ObservationField("marker_angle", 1, -1.0, 1.0),
            ObservationField("marker_in_view", 1, 0.0, 1.0),
            ObservationField("energy", 1, 0.0, 1.0),
            ObservationField("recharging", 1, 0.0, 1.0),
            ObservationField("lava_occupancy", 9, 0.0, 1.0),
            ObservationField("event_rates", len(self.event_names), 0.0, 1.0),
            ObservationField("remaining_time", 1, 0.0, 1.0),
        ))

    def observation_spec(self) -> ObservationSpec:
        return self._obs_spec

    def action_spec(self) -> spaces.Box:
        return spaces.Box(low=-1.0, high=1.0, shape=(ACTION_DIM,), dtype=np.float64)

    @property
    def obs_dim(self) -> int:
        return self._obs_spec.dim

    @property
    def act_dim(self) -> int:
        return ACTION_DIM

    # Geometry

    def in_lava(self, position) -> bool:
        return any(in_rect(position, rect) for rect in self.config.lava)

    def _spawn_point(self) -> np.ndarray:
        lo, hi = SPAWN_MARGIN, 1.0 - SPAWN_MARGIN
        for _ in range(10000):
            p = self.rng.uniform(lo, hi, size=2)
            if not self.in_lava(p):
                return p
        raise exception.ConfigurationError("Couldn't find a lava-free spawn point")

    def marker_bearing(self, state: ArenaState) -> float:
        """Angle from the heading to the marker, in [-pi, pi)."""
        d = np.asarray(self.config.marker) - state.position
        if not np.any(d):
            return 0.0
        return wrap_angle(math.atan2(d[1], d[0]) - state.heading)

    def goal_distance(self, state: ArenaState) -> float:
        return float(np.linalg.norm(state.goal - state.position))

    def lava_occupancy(self, position) -> np.ndarray:
        out = np.zeros(9)
        i = 0
        for dy in (-1, 0, 1):
            for dx in (-1, 0, 1):
                cell = (
                    position[0] + dx * LAVA_GRID_SPACING,
                    position[1] + dy * LAVA_GRID_SPACING,
                )
                if 0.0 <= cell[0] <= 1.0 and 0.0 <= cell[1] <= 1.0:
                    out[i] = float(self.in_lava(cell))
                i += 1
        return out

    # Episode

    def reset(self, seed: Optional[int] = None) -> np.ndarray:
        if seed is not None:
            self.rng = np.random.default_rng(seed)
        position = self._spawn_point()
        goal = self._spawn_point()
        while np.linalg.norm(goal - position) <= 2.0 * self.config.goal_radius:
            goal = self._spawn_point()
        self.state = ArenaState(
            position=position,
            velocity=np.zeros(2),
            heading=float(self.rng.uniform(-math.pi, math.pi)),
            energy=float(self.rng.uniform(self.config.initial_energy_low, 1.0)),
            step=0,
            goal=goal,
        )
        self._event_sums = np.zeros(len(self.event_names))
        if self.trajectory is not None:
            self.trajectory = []
        return self.observation()

    def event_rates(self) -> np.ndarray:
        if self.state is None or self.state.step == 0:
            return np.zeros(len(self.event_names))
        return self._event_sums / self.state.step

    def observation(self) -> np.ndarray:
        s = self.state
        if s is None:
            raise exception.InvalidArgumentError("Call reset() before observing the arena")
        cfg = self.config
        bearing = self.marker_bearing(s)
        return np.concatenate((
            s.position,
            s.goal - s.position,
            [self.goal_distance(s)],
            s.velocity / cfg.speed_cap if cfg.speed_cap > 0 else s.velocity * 0.0,
            [math.cos(s.heading), math.sin(s.heading)],
            [bearing / math.pi],
            [float(abs(bearing) <= cfg.fov_half_angle)],
            [s.energy],
            [float(s.recharging)],
            self.lava_occupancy(s.position),
            self.event_rates(),
            [1.0 - s.step / cfg.episode_length],
        ))

    def _clip_action(self, action) -> np.ndarray:
        action = np.asarray(action, dtype=np.float64).reshape(-1)
        if action.shape != (ACTION_DIM,):
            raise exception.ConfigurationError(
                f"Arena actions have {ACTION_DIM} entries, got {action.shape}",
            )
        if not np.all(np.isfinite(action)):
            raise exception.InvalidArgumentError(f"Non-finite action {action}")
        clipped = np.clip(action, -1.0, 1.0)
        if not self._warned_clip and np.any(clipped != action):
            LOG.warning(f"Action {action} outside [-1, 1], clipping (logged once)")
            self._warned_clip = True
        return clipped

    def _advance(self, action: np.ndarray) -> None:
        """Euler step of heading, velocity, position and energy."""
        s, cfg = self.state, self.config
        s.recharging = bool(action[3] > 0.0)
        s.heading = wrap_angle(s.heading + cfg.turn_rate * action[2] * cfg.dt)
        if s.recharging:
            s.velocity = np.zeros(2)
        else:
            s.velocity = s.velocity + (cfg.accel * action[:2] - cfg.drag * s.velocity) * cfg.dt
            speed = np.linalg.norm(s.velocity)
            if speed > cfg.speed_cap:
                s.velocity = s.velocity * (cfg.speed_cap / speed)
        position = s.position + s.velocity * cfg.dt
        hit_wall = (position < 0.0) | (position > 1.0)
        s.position = np.clip(position, 0.0, 1.0)
        s.velocity = np.where(hit_wall, 0.0, s.velocity)
        s.energy = float(np.clip(
            s.energy
            - cfg.energy_drain * np.linalg.norm(s.velocity) * cfg.dt
            + cfg.recharge_rate * float(s.recharging),
            0.0,
            1.0,
        ))
        s.step += 1

    def behavior_events(self, action: np.ndarray) -> dict:
        s, cfg = self.state, self.config
        return {
            "in_lava": int(self.in_lava(s.position)),
            "not_looking": int(abs(self.marker_bearing(s)) > cfg.fov_half_angle),
            "above_speed": int(np.linalg.norm(s.velocity) > cfg.v_max),
            "below_energy": int(s.energy < cfg.min_energy),
        }

    def step(self, action) -> StepOutcome:
        if self.state is None:
            raise exception.InvalidArgumentError("Call reset() before stepping the arena")
        action = self._clip_action(action)
        d_prev = self.goal_distance(self.state)
        self._advance(action)
        d_now = self.goal_distance(self.state)

        indicators = self.behavior_events(action)
        self._event_sums += np.array([indicators[n] for n in self.event_names], dtype=np.float64)
        success = d_now <= self.config.goal_radius
        indicators[SUCCESS_EVENT] = int(success)

        reward = self.config.shaping * (d_prev - d_now) + (1.0 if success else 0.0)
        truncated = not success and self.state.step >= self.config.episode_length
        outcome = StepOutcome(
            next_observation=self.observation(),
            reward=float(reward),
            indicators=indicators,
            done=bool(success),
            truncated=bool(truncated),
        )
        if self.trajectory is not None:
            self._record(action, outcome)
        return outcome

    # Trajectories

    def record_trajectory(self, enabled=True) -> None:
        self.trajectory = [] if enabled else None

    def _record(self, action, outcome: StepOutcome) -> None:
        s = self.state
        row = {
            "step": s.step,
            "x": s.position[0],
            "y": s.position[1],
            "vx": s.velocity[0],
            "vy": s.velocity[1],
            "heading": s.heading,
            "energy": s.energy,
            "goal_x": s.goal[0],
            "goal_y": s.goal[1],
        }
        for i, a in enumerate(action):
            row[f"action_{i}"] = a
        row["reward"] = outcome.reward
        row.update(outcome.indicators)
        row["done"] = int(outcome.done)
        row["truncated"] = int(outcome.truncated)
        self.trajectory.append(row)

    def dump_trajectory(self, path) -> int:
        """Write the recorded steps of the current episode as CSV."""
        if not self.trajectory:
            raise exception.InvalidArgumentError("No trajectory recorded")
        with open(path, "w", newline="") as fp:
            writer = csv.DictWriter(fp, fieldnames=list(self.trajectory[0]))
            writer.writeheader()
            for row in self.trajectory:
                writer.writerow({
                    k: fmt_float(v) if isinstance(v, float) else v
                    for k, v in row.items()
                })
        return len(self.trajectory)
