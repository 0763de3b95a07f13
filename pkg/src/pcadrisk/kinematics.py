"""Shared kinematic types: 2D vectors, vehicle states, scene snapshots.

Road frame: X along the road, Y lateral (counter-clockwise positive).
Positions refer to the geometric centre of each body.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, replace

DEFAULT_LENGTH = 4.0
DEFAULT_WIDTH = 2.0
DEFAULT_MASS = 1500.0


@dataclass(frozen=True)
class Vec2:
    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise ValueError(f"non-finite vector component: ({self.x}, {self.y})")

    def __add__(self, other: Vec2) -> Vec2:
        return Vec2(self.x + other.x, self.y + other.y)

    def __sub__(self, other: Vec2) -> Vec2:
        return Vec2(self.x - other.x, self.y - other.y)

    def __mul__(self, k: float) -> Vec2:
        return Vec2(self.x * k, self.y * k)

    __rmul__ = __mul__

    def __neg__(self) -> Vec2:
        return Vec2(-self.x, -self.y)

    def dot(self, other: Vec2) -> float:
        return self.x * other.x + self.y * other.y

    def cross(self, other: Vec2) -> float:
        """Scalar 2D cross product ``self.x * other.y - self.y * other.x``."""
        return self.x * other.y - self.y * other.x

    def norm(self) -> float:
        return math.hypot(self.x, self.y)

    def unit(self) -> Vec2:
        n = self.norm()
        if n == 0.0:
            raise ValueError("cannot normalise a zero vector")
        return Vec2(self.x / n, self.y / n)

    def rotated(self, angle: float) -> Vec2:
        c, s = math.cos(angle), math.sin(angle)
        return Vec2(c * self.x - s * self.y, s * self.x + c * self.y)

    def as_tuple(self) -> tuple[float, float]:
        return (self.x, self.y)


ZERO = Vec2(0.0, 0.0)


@dataclass(frozen=True)
class VehicleState:
    position: Vec2
    velocity: Vec2 = ZERO
    acceleration: Vec2 = ZERO
    length: float = DEFAULT_LENGTH
    width: float = DEFAULT_WIDTH
    mass: float = DEFAULT_MASS

    def __post_init__(self) -> None:
        for name in ("length", "width", "mass"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive and finite, got {value}")


class NeighbourKind(str, enum.Enum):
    MOVING_VEHICLE = "moving_vehicle"
    STATIC_OBJECT = "static_object"


@dataclass(frozen=True)
class SceneSnapshot:
    subject: VehicleState
    neighbour: VehicleState
    neighbour_kind: NeighbourKind = NeighbourKind.MOVING_VEHICLE
    time: float = 0.0

    def __post_init__(self) -> None:
        if self.neighbour_kind is NeighbourKind.STATIC_OBJECT and (
            self.neighbour.velocity != ZERO or self.neighbour.acceleration != ZERO
        ):
            raise ValueError("static objects must have zero velocity and acceleration")

    @property
    def is_static(self) -> bool:
        return self.neighbour_kind is NeighbourKind.STATIC_OBJECT

    def with_velocities(self, v_s: Vec2 | None = None, v_n: Vec2 | None = None) -> SceneSnapshot:
        subject = self.subject if v_s is None else replace(self.subject, velocity=v_s)
        neighbour = self.neighbour if v_n is None else replace(self.neighbour, velocity=v_n)
        return replace(self, subject=subject, neighbour=neighbour)


@dataclass(frozen=True)
class ReferencePointSet:
    subject_left: Vec2
    subject_right: Vec2
    neighbour_left: Vec2
    neighbour_right: Vec2

    def pairs(self) -> list[tuple[Vec2, Vec2]]:
        """The four (subject point, neighbour point) cross combinations."""
        return [
            (s, n)
            for s in (self.subject_left, self.subject_right)
            for n in (self.neighbour_left, self.neighbour_right)
        ]


def neighbour_ahead(snapshot: SceneSnapshot) -> bool:
    return snapshot.neighbour.position.x >= snapshot.subject.position.x


def reference_points(snapshot: SceneSnapshot) -> ReferencePointSet:
    """Corner points on the facing sides of the two bodies.

    With the neighbour ahead these are the subject's front corners and the
    neighbour's rear corners. With the neighbour behind, the roles flip
    (subject rear, neighbour front) so the points still face each other.
    """
    s, n = snapshot.subject, snapshot.neighbour
    sign = 1.0 if neighbour_ahead(snapshot) else -1.0
    sx = sign * s.length / 2
    nx = -sign * n.length / 2
    return ReferencePointSet(
        subject_left=s.position + Vec2(sx, s.width / 2),
        subject_right=s.position + Vec2(sx, -s.width / 2),
        neighbour_left=n.position + Vec2(nx, n.width / 2),
        neighbour_right=n.position + Vec2(nx, -n.width / 2),
    )


def propagate(state: VehicleState, dt: float) -> VehicleState:
    """Constant-acceleration step of length ``dt``."""
    if dt < 0:
        raise ValueError(f"dt must be non-negative, got {dt}")
    p = state.position + state.velocity * dt + state.acceleration * (0.5 * dt * dt)
    v = state.velocity + state.acceleration * dt
    return replace(state, position=p, velocity=v)


def bodies_overlap(a: VehicleState, b: VehicleState) -> bool:
    """Axis-aligned rectangle overlap test (touching counts as overlap)."""
    dx = abs(a.position.x - b.position.x)
    dy = abs(a.position.y - b.position.y)
    return dx <= (a.length + b.length) / 2 and dy <= (a.width + b.width) / 2


def bumper_gap(snapshot: SceneSnapshot) -> float:
    """Longitudinal clearance between the facing ends (negative when overlapping in X)."""
    s, n = snapshot.subject, snapshot.neighbour
    return abs(n.position.x - s.position.x) - (s.length + n.length) / 2


def static_obstacle(x: float, y: float, length: float = DEFAULT_LENGTH, width: float = DEFAULT_WIDTH,
                    mass: float = DEFAULT_MASS) -> VehicleState:
    return VehicleState(Vec2(x, y), ZERO, ZERO, length, width, mass)
