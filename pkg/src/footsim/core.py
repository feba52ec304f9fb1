"""Shared geometric types, the character coordinate frame, and horizontal-plane helpers."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple


class PlanarVec(NamedTuple):
    x: float
    y: float

    def norm(self) -> float:
        return math.hypot(self.x, self.y)

    def dot(self, other: "PlanarVec") -> float:
        return self.x * other.x + self.y * other.y

    def scaled(self, k: float) -> "PlanarVec":
        return PlanarVec(self.x * k, self.y * k)

    def add(self, other: "PlanarVec") -> "PlanarVec":
        return PlanarVec(self.x + other.x, self.y + other.y)

    def sub(self, other: "PlanarVec") -> "PlanarVec":
        return PlanarVec(self.x - other.x, self.y - other.y)

    def normalized(self) -> "PlanarVec":
        n = math.hypot(self.x, self.y)
        if n < 1e-12:
            raise ValueError("cannot normalize zero planar vector")
        return PlanarVec(self.x / n, self.y / n)

    def angle(self) -> float:
        return math.atan2(self.y, self.x)


class SpatialVec(NamedTuple):
    x: float
    y: float
    z: float

    def norm(self) -> float:
        return math.sqrt(self.x * self.x + self.y * self.y + self.z * self.z)

    def dot(self, other: "SpatialVec") -> float:
        return self.x * other.x + self.y * other.y + self.z * other.z

    def scaled(self, k: float) -> "SpatialVec":
        return SpatialVec(self.x * k, self.y * k, self.z * k)

    def add(self, other: "SpatialVec") -> "SpatialVec":
        return SpatialVec(self.x + other.x, self.y + other.y, self.z + other.z)

    def sub(self, other: "SpatialVec") -> "SpatialVec":
        return SpatialVec(self.x - other.x, self.y - other.y, self.z - other.z)

    def horizontal(self) -> PlanarVec:
        return PlanarVec(self.x, self.y)


def unit_from_angle(theta: float) -> PlanarVec:
    return PlanarVec(math.cos(theta), math.sin(theta))


# Rigid body-point offsets in the character frame (x forward, y left, z up from
# the ground plane).  Root sits at pelvis height 0.9 m when upright; the six
# trap-target points are fixed offsets so they stay testable under rotation.
ROOT_HEIGHT = 0.9
BODY_POINT_OFFSETS: dict[str, SpatialVec] = {
    "head": SpatialVec(0.0, 0.0, 1.6),
    "torso": SpatialVec(0.0, 0.0, 1.2),
    "lower_leg_L": SpatialVec(0.0, 0.12, 0.35),
    "lower_leg_R": SpatialVec(0.0, -0.12, 0.35),
    "foot_L": SpatialVec(0.0, 0.12, 0.05),
    "foot_R": SpatialVec(0.0, -0.12, 0.05),
}
BODY_PARTS = tuple(BODY_POINT_OFFSETS)
TRAP_FEET = ("foot_L", "foot_R")

HANDBALL_OFFSETS = (SpatialVec(0.25, 0.0, 1.25), SpatialVec(-0.25, 0.0, 1.25))
HANDBALL_RADIUS = 0.12

BODY_SPHERE_RADII = {
    "head": 0.12,
    "torso": 0.18,
    "lower_leg_L": 0.07,
    "lower_leg_R": 0.07,
}
FOOT_RADIUS = 0.08
FOOT_LATERAL = 0.12
FOOT_BASE_Z = 0.05


@dataclass(slots=True)
class CharacterFrame:
    """Planar orthonormal basis: x along facing, y = up x facing, origin at the
    root projected onto the ground."""

    origin: PlanarVec
    x_axis: PlanarVec

    @property
    def y_axis(self) -> PlanarVec:
        # up x x_axis, expressed in the plane
        return PlanarVec(-self.x_axis.y, self.x_axis.x)


def world_to_character(frame: CharacterFrame, v: SpatialVec, kind: str = "point") -> SpatialVec:
    """Express a world-frame point or vector in the character frame.

    Points are translated then rotated; vectors are rotated only; z passes
    through unchanged.
    """
    if kind == "point":
        px = v.x - frame.origin.x
        py = v.y - frame.origin.y
    else:
        px, py = v.x, v.y
    xa, ya = frame.x_axis, frame.y_axis
    return SpatialVec(px * xa.x + py * xa.y, px * ya.x + py * ya.y, v.z)


def character_to_world(frame: CharacterFrame, v: SpatialVec, kind: str = "point") -> SpatialVec:
    """Inverse of :func:`world_to_character` within 1e-9."""
    xa, ya = frame.x_axis, frame.y_axis
    wx = v.x * xa.x + v.y * ya.x
    wy = v.x * xa.y + v.y * ya.y
    if kind == "point":
        wx += frame.origin.x
        wy += frame.origin.y
    return SpatialVec(wx, wy, v.z)


@dataclass(slots=True)
class BallState:
    pos: SpatialVec
    vel: SpatialVec
    ang_vel: SpatialVec = SpatialVec(0.0, 0.0, 0.0)
    radius: float = 0.11
    mass: float = 0.45

    def copy(self) -> "BallState":
        return BallState(self.pos, self.vel, self.ang_vel, self.radius, self.mass)


@dataclass(slots=True)
class CharacterState:
    root_pos: SpatialVec
    root_vel: SpatialVec
    facing: PlanarVec
    facing_rate: float = 0.0
    gait_phase: float = 0.0
    foot_pos: tuple[SpatialVec, SpatialVec] = (
        SpatialVec(0.0, FOOT_LATERAL, FOOT_BASE_Z),
        SpatialVec(0.0, -FOOT_LATERAL, FOOT_BASE_Z),
    )
    foot_vel: tuple[SpatialVec, SpatialVec] = (
        SpatialVec(0.0, 0.0, 0.0),
        SpatialVec(0.0, 0.0, 0.0),
    )
    foot_contact: tuple[bool, bool] = (True, True)
    # transient kick-swing sweep state; the base freezes at strike start so
    # root drift cannot tilt the contact normal
    strike_foot: int = -1
    strike_disp: SpatialVec = SpatialVec(0.0, 0.0, 0.0)
    strike_base: SpatialVec = SpatialVec(0.0, 0.0, 0.0)

    def frame(self) -> CharacterFrame:
        return CharacterFrame(PlanarVec(self.root_pos.x, self.root_pos.y), self.facing)

    def body_point(self, name: str) -> SpatialVec:
        off = BODY_POINT_OFFSETS[name]
        f = self.facing
        return SpatialVec(
            self.root_pos.x + off.x * f.x - off.y * f.y,
            self.root_pos.y + off.x * f.y + off.y * f.x,
            off.z,
        )

    @property
    def body_points(self) -> dict[str, SpatialVec]:
        return {name: self.body_point(name) for name in BODY_POINT_OFFSETS}

    def handball_zones(self) -> tuple[SpatialVec, SpatialVec]:
        f = self.facing
        out = []
        for off in HANDBALL_OFFSETS:
            out.append(
                SpatialVec(
                    self.root_pos.x + off.x * f.x - off.y * f.y,
                    self.root_pos.y + off.x * f.y + off.y * f.x,
                    off.z,
                )
            )
        return out[0], out[1]

    def copy(self) -> "CharacterState":
        return CharacterState(
            self.root_pos,
            self.root_vel,
            self.facing,
            self.facing_rate,
            self.gait_phase,
            self.foot_pos,
            self.foot_vel,
            self.foot_contact,
            self.strike_foot,
            self.strike_disp,
            self.strike_base,
        )


def rest_pose(x: float = 0.0, y: float = 0.0, facing: PlanarVec = PlanarVec(1.0, 0.0)) -> CharacterState:
    """Standing upright, at rest, feet planted at the base offsets."""
    f = facing.normalized()
    left = SpatialVec(x - f.y * FOOT_LATERAL, y + f.x * FOOT_LATERAL, FOOT_BASE_Z)
    right = SpatialVec(x + f.y * FOOT_LATERAL, y - f.x * FOOT_LATERAL, FOOT_BASE_Z)
    return CharacterState(
        root_pos=SpatialVec(x, y, ROOT_HEIGHT),
        root_vel=SpatialVec(0.0, 0.0, 0.0),
        facing=f,
        foot_pos=(left, right),
    )


def horizontal_distance(a: SpatialVec, b: SpatialVec) -> float:
    return math.hypot(a.x - b.x, a.y - b.y)


def approaching(ball: BallState, char: CharacterState) -> bool:
    """True iff the horizontal ball-character distance is strictly decreasing.

    Colocated (distance <= 1e-6) reports False: "approaching" is undefined.
    """
    dx = ball.pos.x - char.root_pos.x
    dy = ball.pos.y - char.root_pos.y
    if math.hypot(dx, dy) <= 1e-6:
        return False
    rvx = ball.vel.x - char.root_vel.x
    rvy = ball.vel.y - char.root_vel.y
    return dx * rvx + dy * rvy < 0.0
