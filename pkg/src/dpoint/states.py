"""Discrete learning states for the D-point planner and the opponent baseline."""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .geometry import Point3, Region, checked_norm, classify_region, dpoint

N_DPOINT_STATES = 36
N_OPPONENT_STATES = 4 * 4 * 8
SECTOR_WIDTH_DEG = 45.0

_ORACLE_SAMPLES = 1_000_000
_ORACLE_SEED = 20190403


class InvalidState(ValueError):
    """A region triple outside the feasible D-point state set."""


class DPointState(NamedTuple):
    target_region: Region
    agent_region: Region
    dpoint_region: Region

    def __str__(self) -> str:
        return "[" + ", ".join(r.name for r in self) + "]"


@dataclass(frozen=True, slots=True)
class OpponentState:
    target_region: Region
    obstacle_region: Region
    sector: int

    def __post_init__(self):
        if not 1 <= self.sector <= 8:
            raise ValueError(f"sector must be in 1..8, got {self.sector}")


def encode_state(agent: Point3, target: Point3, obstacle: Point3) -> DPointState:
    """Region triple of target, agent and D-point, centered on the obstacle."""
    d, _ = dpoint(agent, target, obstacle)
    return DPointState(
        classify_region(target, obstacle),
        classify_region(agent, obstacle),
        classify_region(d, obstacle),
    )


def _regions_np(dx: np.ndarray, dy: np.ndarray) -> np.ndarray:
    # Same tie-breaking as classify_region.
    right = dx >= 0
    up = dy >= 0
    return np.where(up, np.where(right, 1, 2), np.where(right, 4, 3))


def sample_state_codes(n: int, rng: np.random.Generator, half_width: float = 50.0) -> np.ndarray:
    """Encode ``n`` random configurations; returns an ``(n, 3)`` array of region numbers.

    Uses the algebraic projection ``a + v_at (v_at . v_ao) / |v_at|^2`` for
    the D-point rather than the angle route of :func:`encode_state`.
    """
    pts = rng.uniform(-half_width, half_width, size=(3, n, 2))
    agent, target, obstacle = pts
    v_at = target - agent
    v_ao = obstacle - agent
    t = np.einsum("ij,ij->i", v_at, v_ao) / np.einsum("ij,ij->i", v_at, v_at)
    d = agent + v_at * t[:, None]
    rel = lambda p: _regions_np(p[:, 0] - obstacle[:, 0], p[:, 1] - obstacle[:, 1])  # noqa: E731
    return np.stack([rel(target), rel(agent), rel(d)], axis=1)


def analytic_feasible_regions(target_region: Region, agent_region: Region) -> frozenset[Region]:
    """D-point regions reachable for a target/agent quadrant pair.

    If both endpoints of the line satisfy ``p . D > 0`` they cannot sit in a
    quadrant where every point has ``p . D < 0``; that rules out the opposite
    quadrant of a shared region, and for split pairs leaves either the two
    endpoint quadrants (adjacent) or the other two (diagonal).
    """
    if target_region == agent_region:
        return frozenset(Region) - {target_region.opposite}
    if target_region.opposite == agent_region:
        return frozenset(Region) - {target_region, agent_region}
    return frozenset({target_region, agent_region})


@functools.lru_cache(maxsize=None)
def enumerate_valid_states() -> frozenset[DPointState]:
    rng = np.random.default_rng(_ORACLE_SEED)
    codes = np.unique(sample_state_codes(_ORACLE_SAMPLES, rng), axis=0)
    sampled = {DPointState(*(Region(int(c)) for c in row)) for row in codes}
    analytic = {
        DPointState(t, a, d)
        for t in Region
        for a in Region
        for d in analytic_feasible_regions(t, a)
    }
    if sampled != analytic or len(sampled) != N_DPOINT_STATES:
        raise AssertionError(
            f"state oracle disagreement: sampled {len(sampled)} states, "
            f"analytic {len(analytic)}, symmetric difference {sampled ^ analytic}"
        )
    return frozenset(sampled)


@functools.lru_cache(maxsize=None)
def _ordered_states() -> tuple[DPointState, ...]:
    return tuple(sorted(enumerate_valid_states()))


@functools.lru_cache(maxsize=None)
def _index_lookup() -> dict[DPointState, int]:
    return {s: i for i, s in enumerate(_ordered_states())}


def state_index(s: DPointState) -> int:
    try:
        return _index_lookup()[s]
    except KeyError:
        raise InvalidState(f"{s} is not a feasible D-point state") from None


def state_from_index(index: int) -> DPointState:
    states = _ordered_states()
    if not 0 <= index < len(states):
        raise IndexError(f"state index {index} out of range")
    return states[index]


def coerce_valid(s: DPointState) -> DPointState:
    """Map a measure-zero boundary triple onto a feasible one.

    When the D-point lands exactly on a quadrant axis (e.g. the line passes
    through the obstacle center), tie-breaking can produce a triple the
    open-quadrant argument forbids. Such triples keep their target/agent pair
    and take the lowest feasible D-point region.
    """
    if s in _index_lookup():
        return s
    feasible = sorted(analytic_feasible_regions(s.target_region, s.agent_region))
    return DPointState(s.target_region, s.agent_region, feasible[0])


def angle_sector(angle_deg: float) -> int:
    if not 0.0 <= angle_deg < 360.0:
        raise ValueError(f"angle {angle_deg} outside [0, 360)")
    return int(angle_deg // SECTOR_WIDTH_DEG) + 1


def opponent_angle_deg(robot: Point3, target: Point3, obstacle: Point3) -> float:
    """Counterclockwise angle from the robot->obstacle ray to the robot->target ray."""
    to_t = target - robot
    to_o = obstacle - robot
    ang = math.degrees(math.atan2(to_t.y, to_t.x) - math.atan2(to_o.y, to_o.x)) % 360.0
    # % can round a tiny negative up to exactly 360.0
    return 0.0 if ang >= 360.0 else ang


def encode_opponent_state(robot: Point3, target: Point3, obstacle: Point3) -> OpponentState:
    checked_norm(target - robot)
    checked_norm(obstacle - robot)
    return OpponentState(
        classify_region(target, robot),
        classify_region(obstacle, robot),
        angle_sector(opponent_angle_deg(robot, target, obstacle)),
    )


def opponent_state_index(s: OpponentState) -> int:
    return ((s.target_region - 1) * 4 + (s.obstacle_region - 1)) * 8 + (s.sector - 1)
