"""Fixed-timestep dynamic arena: moving obstacles and target, non-safe areas, episodes.

Obstacle and target motion draws only from the world's own RNG stream and never
depends on what the agent does, so two planners run on the same seed see the
same moving scene frame for frame.
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np

from .geometry import DegenerateVector, Point3, distance, dpoint
from .learning import (
    Action,
    Mode,
    PreconditionViolation,
    QTable,
    TransitionSnapshot,
    Variant,
    q_update,
    rotation_degree,
    select_action,
    signed_rotation,
    transition_reward,
)

MAX_PLACEMENT_ATTEMPTS = 10_000


class PlacementFailure(RuntimeError):
    pass


class Outcome(enum.Enum):
    SUCCESS = "success"
    COLLISION = "collision"
    TRAPPED = "trapped"
    TIMEOUT = "timeout"


class EpisodeMode(enum.Enum):
    TRAIN = "train"
    TEST = "test"


@dataclass(frozen=True)
class ScenarioConfig:
    n_obstacles: int = 15
    r_ns: float = 4.7
    arena: float = 100.0
    r_body: float = 1.0
    r_capture: float = 2.0
    frames_per_action: int = 10
    fps: int = 50
    trap_threshold_s: float = 1.5
    max_frames: int = 6000
    agent_speed: float = 0.2
    min_speed: float = 0.02
    max_speed: float = 0.05
    redirect_interval: int = 120
    min_obstacle_clearance: float = 5.0
    min_target_distance: float = 50.0
    max_target_distance: float = 70.0
    static: bool = False
    seed: int = 0

    @property
    def trap_frames(self) -> int:
        return int(round(self.trap_threshold_s * self.fps))

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class MobileObject:
    position: Point3
    heading: float
    speed: float
    redirect_countdown: int


@dataclass(frozen=True)
class AgentState:
    position: Point3
    heading: float
    in_nonsafe: bool
    nonsafe_frames: int


class WorldState:
    """Mutable state of one episode.

    Row 0 of the motion arrays is the target, rows ``1..n`` the obstacles.
    """

    def __init__(
        self,
        config: ScenarioConfig,
        rng: np.random.Generator,
        agent: tuple[float, float],
        positions: np.ndarray,
        headings: np.ndarray,
        speeds: np.ndarray,
        countdowns: np.ndarray,
    ):
        self.config = config
        self.trap_frames = config.trap_frames
        self.rng = rng
        self.ax, self.ay = float(agent[0]), float(agent[1])
        self.pos = np.asarray(positions, dtype=float).reshape(-1, 2).copy()
        self.speed = np.asarray(speeds, dtype=float).copy()
        self.vel = np.stack([np.cos(headings), np.sin(headings)], axis=1) * self.speed[:, None]
        self.frame = 0
        self._t = 0  # object steps taken; equals frame unless objects are stepped alone
        self.redirect_at = np.asarray(countdowns, dtype=int).copy()
        self._schedule()
        self.seeking = True
        self.heading = math.atan2(self.pos[0, 1] - self.ay, self.pos[0, 0] - self.ax)
        self.nonsafe_frames = 0
        self.path = [(self.ax, self.ay)]
        self._update_nearest()
        self.in_nonsafe = self.nearest_dist <= config.r_ns

    @property
    def n_obstacles(self) -> int:
        return len(self.pos) - 1

    @property
    def agent_point(self) -> Point3:
        return Point3(self.ax, self.ay)

    @property
    def target_point(self) -> Point3:
        return Point3(float(self.pos[0, 0]), float(self.pos[0, 1]))

    def obstacle_point(self, i: int) -> Point3:
        return Point3(float(self.pos[i + 1, 0]), float(self.pos[i + 1, 1]))

    @property
    def agent(self) -> AgentState:
        return AgentState(self.agent_point, self.heading, self.in_nonsafe, self.nonsafe_frames)

    def _mobile(self, row: int) -> MobileObject:
        vx, vy = self.vel[row]
        return MobileObject(
            Point3(float(self.pos[row, 0]), float(self.pos[row, 1])),
            math.atan2(vy, vx),
            float(self.speed[row]),
            int(self.redirect_at[row] - self._t),
        )

    @property
    def target(self) -> MobileObject:
        return self._mobile(0)

    @property
    def obstacles(self) -> list[MobileObject]:
        return [self._mobile(r) for r in range(1, len(self.pos))]

    def target_distance(self) -> float:
        return math.hypot(self.pos[0, 0] - self.ax, self.pos[0, 1] - self.ay)

    def _update_nearest(self) -> None:
        if len(self.pos) == 1:
            self.nearest_id, self.nearest_dist = -1, math.inf
            return
        d = np.hypot(self.pos[1:, 0] - self.ax, self.pos[1:, 1] - self.ay)
        i = int(d.argmin())
        self.nearest_id, self.nearest_dist = i, float(d[i])

    def _schedule(self) -> None:
        # Earliest object step at which a wall contact or a redirect can happen.
        p, v, size = self.pos, self.vel, self.config.arena
        with np.errstate(divide="ignore", invalid="ignore"):
            t_hit = np.where(v > 0, (size - p) / v, np.where(v < 0, p / -v, np.inf))
        soonest = float(t_hit.min()) if t_hit.size else math.inf
        wall = self._t + max(1, int(soonest)) if math.isfinite(soonest) else math.inf
        self.next_event = min(wall, int(self.redirect_at.min()))

    def step_objects(self) -> None:
        """Advance the target and obstacles by one frame."""
        p, v = self.pos, self.vel
        p += v
        self._t += 1
        if self._t < self.next_event:
            return
        size = self.config.arena
        low, high = p < 0.0, p > size
        if low.any() or high.any():
            p[low] = -p[low]
            p[high] = 2.0 * size - p[high]
            v[low | high] *= -1.0
        idx = np.flatnonzero(self.redirect_at <= self._t)
        if len(idx):
            h = self.rng.uniform(0.0, 2.0 * math.pi, size=len(idx))
            v[idx, 0] = np.cos(h) * self.speed[idx]
            v[idx, 1] = np.sin(h) * self.speed[idx]
            self.redirect_at[idx] = self._t + self.config.redirect_interval
        self._schedule()

    def outcome(self) -> Optional[Outcome]:
        cfg = self.config
        if self.target_distance() <= cfg.r_capture:
            return Outcome.SUCCESS
        if self.nearest_dist < cfg.r_body:
            return Outcome.COLLISION
        if self.nonsafe_frames >= self.trap_frames:
            return Outcome.TRAPPED
        if self.frame >= cfg.max_frames:
            return Outcome.TIMEOUT
        return None

    def snapshot(self, obstacle_id: int, variant: Variant) -> TransitionSnapshot:
        """Measurements against ``obstacle_id``; the state is encoded against the current nearest."""
        agent, target = self.agent_point, self.target_point
        obstacle = self.obstacle_point(obstacle_id)
        return TransitionSnapshot(
            frame=self.frame,
            agent=agent,
            target=target,
            obstacle=obstacle,
            obstacle_id=obstacle_id,
            v_ao=distance(agent, obstacle),
            d_do=d_do(agent, target, obstacle),
            state=variant.encode(agent, target, self.obstacle_point(self.nearest_id)),
        )


def d_do(agent: Point3, target: Point3, obstacle: Point3) -> float:
    """Distance from the D-point to the obstacle."""
    try:
        d, _ = dpoint(agent, target, obstacle)
    except DegenerateVector:
        return distance(agent, obstacle)
    return distance(d, obstacle)


def generate_scenario(config: ScenarioConfig, rng: Optional[np.random.Generator] = None) -> WorldState:
    """Uniform placement by rejection sampling.

    The agent keeps more than ``min_obstacle_clearance`` from every obstacle and
    starts between ``min_target_distance`` and ``max_target_distance`` from
    the target.
    """
    if rng is None:
        rng = np.random.default_rng(config.seed)
    size = config.arena
    agent = rng.uniform(0.0, size, 2)

    def place(ok) -> np.ndarray:
        for _ in range(MAX_PLACEMENT_ATTEMPTS):
            p = rng.uniform(0.0, size, 2)
            if ok(float(np.hypot(*(p - agent)))):
                return p
        raise PlacementFailure(
            f"no valid placement after {MAX_PLACEMENT_ATTEMPTS} attempts for {config}"
        )

    target = place(lambda d: config.min_target_distance <= d <= config.max_target_distance)
    obstacles = [place(lambda d: d > config.min_obstacle_clearance) for _ in range(config.n_obstacles)]
    positions = np.vstack([target] + obstacles)
    m = len(positions)
    headings = rng.uniform(0.0, 2.0 * math.pi, m)
    speeds = rng.uniform(config.min_speed, config.max_speed, m)
    if config.static:
        speeds[:] = 0.0
    countdowns = rng.integers(1, config.redirect_interval + 1, m)
    return WorldState(config, rng, (agent[0], agent[1]), positions, headings, speeds, countdowns)


class Trace:
    """Per-frame log in ``frame,agent_x,agent_y,heading,nearest_obstacle_id,in_nonsafe,event`` form."""

    HEADER = "frame,agent_x,agent_y,heading,nearest_obstacle_id,in_nonsafe,event"

    def __init__(self, meta: Optional[dict] = None):
        self.meta = dict(meta or {})
        self.rows: list[list] = []

    def record(self, world: WorldState) -> None:
        self.rows.append(
            [world.frame, world.ax, world.ay, world.heading, world.nearest_id, world.in_nonsafe, []]
        )

    def event(self, text: str) -> None:
        self.rows[-1][6].append(text)

    def lines(self) -> list[str]:
        out = [f"# {k}={v}" for k, v in self.meta.items()]
        out.append(self.HEADER)
        for frame, x, y, h, nid, ns, events in self.rows:
            ev = ";".join(events) if events else "-"
            out.append(f"{frame},{x!r},{y!r},{h!r},{nid},{int(ns)},{ev}")
        return out

    def write(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("\n".join(self.lines()) + "\n")


def step_frame(world: WorldState, trace: Optional[Trace] = None) -> WorldState:
    """One fixed timestep for every object, agent included."""
    cfg = world.config
    world.step_objects()
    if world.seeking:
        dx, dy = world.pos[0, 0] - world.ax, world.pos[0, 1] - world.ay
        world.heading = math.atan2(dy, dx)
    world.ax += cfg.agent_speed * math.cos(world.heading)
    world.ay += cfg.agent_speed * math.sin(world.heading)
    world.frame += 1
    world.path.append((world.ax, world.ay))
    world._update_nearest()
    world.in_nonsafe = world.nearest_dist <= cfg.r_ns
    world.nonsafe_frames = world.nonsafe_frames + 1 if world.in_nonsafe else 0
    if trace is not None:
        trace.record(world)
    return world


@dataclass
class TransitionRecord:
    before: TransitionSnapshot
    after: TransitionSnapshot
    action: Action
    degrees: float
    outcome: Optional[Outcome]


def lookahead(world: WorldState, obstacle_id: int):
    """Predicted D-point/obstacle distance after each action, with the scene frozen."""
    cfg = world.config
    agent, target = world.agent_point, world.target_point
    obstacle = world.obstacle_point(obstacle_id)
    degrees = rotation_degree(d_do(agent, target, obstacle), cfg.r_ns)
    reach = cfg.agent_speed * cfg.frames_per_action

    def predict(action: Action) -> float:
        h = world.heading + signed_rotation(action, degrees)
        moved = Point3(agent.x + reach * math.cos(h), agent.y + reach * math.sin(h))
        return d_do(moved, target, obstacle)

    return predict


def execute_action(
    world: WorldState, action: Action, variant: Variant, trace: Optional[Trace] = None
) -> TransitionRecord:
    """Turn, then hold the new heading for one action interval (or until the episode ends)."""
    cfg = world.config
    if not world.in_nonsafe:
        raise PreconditionViolation("actions are only executed inside a non-safe area")
    oid = world.nearest_id
    before = world.snapshot(oid, variant)
    degrees = rotation_degree(before.d_do, cfg.r_ns)
    world.heading += signed_rotation(action, degrees)
    world.seeking = False
    if trace is not None:
        trace.event("action:F" if action is Action.FORWARD else f"action:{action.letter}:{degrees!r}")
    result = None
    for _ in range(cfg.frames_per_action):
        step_frame(world, trace)
        result = world.outcome()
        if result is not None:
            break
    after = world.snapshot(oid, variant)
    return TransitionRecord(before, after, action, degrees, result)


@dataclass
class EpisodeOutcome:
    kind: Outcome
    frames_elapsed: int
    rewards_log: list[tuple[int, int]] = field(default_factory=list)
    path: list[tuple[float, float]] = field(default_factory=list)


def run_episode(
    world: WorldState,
    table: QTable,
    mode: EpisodeMode = EpisodeMode.TEST,
    explore: Mode = Mode.EXPLORE_RANDOM,
    rng: Optional[np.random.Generator] = None,
    gamma: float = 0.9,
    trace: Optional[Trace] = None,
) -> EpisodeOutcome:
    """Drive one episode to its single terminal outcome.

    In the safe area the agent heads straight for the live target position.
    Inside a non-safe area it chooses and executes actions against the nearest
    obstacle; in training mode every action also updates ``table``.
    """
    variant = table.variant
    select_mode = explore if mode is EpisodeMode.TRAIN else Mode.EXPLOIT
    if select_mode is Mode.EXPLORE_RANDOM and rng is None:
        raise ValueError("random exploration needs an rng")
    rewards: list[tuple[int, int]] = []
    if trace is not None:
        trace.record(world)
    result = world.outcome()
    while result is None:
        if world.in_nonsafe:
            oid = world.nearest_id
            s = variant.encode(world.agent_point, world.target_point, world.obstacle_point(oid))
            context = lookahead(world, oid) if select_mode is Mode.EXPLORE_HEURISTIC else None
            action = select_action(table, s, select_mode, context, rng)
            rec = execute_action(world, action, variant, trace)
            r = transition_reward(variant, rec.before, rec.after, world.config.r_ns)
            if mode is EpisodeMode.TRAIN:
                q_update(table, rec.before.state, action, r, rec.after.state, gamma)
            rewards.append((world.frame, r))
            if trace is not None:
                trace.event(f"reward:{r}")
            result = rec.outcome
        else:
            world.seeking = True
            step_frame(world, trace)
            result = world.outcome()
    if trace is not None:
        trace.event(f"done:{result.value}")
    return EpisodeOutcome(result, world.frame, rewards, world.path)
