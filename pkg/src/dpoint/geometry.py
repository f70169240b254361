"""Planar vector math behind the D-point construction.

Points carry three components to match the (x, y, z) notation of the planner,
but the simulator always sets ``z = 0`` and region logic only looks at x and y.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

EPS_MAG = 1e-9


class DegenerateVector(ValueError):
    """A vector needed for an angle or a projection has (near) zero length."""


@dataclass(frozen=True, slots=True)
class Point3:
    x: float
    y: float
    z: float = 0.0

    def __add__(self, other: Point3) -> Point3:
        return Point3(self.x + other.x, self.y + other.y, self.z + other.z)

    def __sub__(self, other: Point3) -> Point3:
        return Point3(self.x - other.x, self.y - other.y, self.z - other.z)

    def __mul__(self, s: float) -> Point3:
        return Point3(self.x * s, self.y * s, self.z * s)

    __rmul__ = __mul__

    def dot(self, other: Point3) -> float:
        return self.x * other.x + self.y * other.y + self.z * other.z

    def norm(self) -> float:
        return math.sqrt(self.dot(self))

    def cross(self, other: Point3) -> Point3:
        return Point3(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.x, self.y, self.z)


class Region(enum.IntEnum):
    """Quadrant of the plane around a center point."""

    R1 = 1
    R2 = 2
    R3 = 3
    R4 = 4

    @property
    def opposite(self) -> Region:
        return Region((self.value + 1) % 4 + 1)


def vectors_at_ao(agent: Point3, target: Point3, obstacle: Point3) -> tuple[Point3, Point3]:
    """Return the agent->target and agent->obstacle vectors."""
    return target - agent, obstacle - agent


def checked_norm(v: Point3) -> float:
    n = v.norm()
    if n < EPS_MAG:
        raise DegenerateVector(f"vector {v.as_tuple()} has magnitude {n:g}")
    return n


def angle_between(v_at: Point3, v_ao: Point3) -> float:
    """Unsigned angle in radians between two vectors, in ``[0, pi]``."""
    n_at = checked_norm(v_at)
    n_ao = checked_norm(v_ao)
    c = v_at.dot(v_ao) / (n_at * n_ao)
    return math.acos(min(1.0, max(-1.0, c)))


def dpoint(agent: Point3, target: Point3, obstacle: Point3) -> tuple[Point3, float]:
    """Foot of the perpendicular from ``obstacle`` onto the agent-target line.

    Returns the D-point and the signed distance ``d_da`` travelled from the
    agent towards the target to reach it (negative when the obstacle lies
    behind the agent).
    """
    v_at, v_ao = vectors_at_ao(agent, target, obstacle)
    theta = angle_between(v_at, v_ao)
    n_ao = v_ao.norm()
    d_da = math.cos(theta) * n_ao
    unit_at = v_at * (1.0 / v_at.norm())
    return agent + unit_at * d_da, d_da


def classify_region(point: Point3, center: Point3) -> Region:
    # Axis ties go to the non-negative side, so R1 owns the origin.
    dx = point.x - center.x
    dy = point.y - center.y
    if dy >= 0:
        return Region.R1 if dx >= 0 else Region.R2
    return Region.R4 if dx >= 0 else Region.R3


def distance(a: Point3, b: Point3) -> float:
    return (a - b).norm()
