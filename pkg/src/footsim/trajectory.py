"""Per-control-tick trajectory records and their JSON Lines file format.

One header object precedes the frame records; replaying a file through the
metrics module reproduces identical reports.  Floats serialize via repr so the
round trip is bitwise exact.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

from .core import BallState, CharacterState, PlanarVec, SpatialVec
from .sim import CollisionEvent

FORMAT_VERSION = 1
PACKAGE_VERSION = "0.1.0"


def config_hash(config_dict: dict) -> str:
    blob = json.dumps(config_dict, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:12]


@dataclass(slots=True)
class PlayerFrame:
    root_pos: SpatialVec
    root_vel: SpatialVec
    facing: PlanarVec
    foot_pos: tuple[SpatialVec, SpatialVec]
    foot_vel: tuple[SpatialVec, SpatialVec]
    foot_contact: tuple[bool, bool]
    fsm: str
    goal: dict
    latent: list[float]
    rewards: dict[str, float]

    @classmethod
    def capture(cls, char: CharacterState, fsm: str, goal: dict, latent, rewards: dict) -> "PlayerFrame":
        return cls(
            char.root_pos,
            char.root_vel,
            char.facing,
            char.foot_pos,
            char.foot_vel,
            char.foot_contact,
            fsm,
            goal,
            [float(v) for v in latent] if latent is not None else [],
            rewards,
        )


@dataclass(slots=True)
class Frame:
    tick: int
    ball: BallState | None
    players: list[PlayerFrame]
    events: list[CollisionEvent]


@dataclass
class Trajectory:
    header: dict
    frames: list[Frame] = field(default_factory=list)


def _vec(v) -> list[float]:
    return list(v)


def frame_to_json(frame: Frame) -> dict:
    ball = None
    if frame.ball is not None:
        b = frame.ball
        ball = {"pos": _vec(b.pos), "vel": _vec(b.vel), "ang_vel": _vec(b.ang_vel),
                "radius": b.radius, "mass": b.mass}
    players = []
    for p in frame.players:
        players.append({
            "root_pos": _vec(p.root_pos),
            "root_vel": _vec(p.root_vel),
            "facing": _vec(p.facing),
            "foot_pos": [_vec(p.foot_pos[0]), _vec(p.foot_pos[1])],
            "foot_vel": [_vec(p.foot_vel[0]), _vec(p.foot_vel[1])],
            "foot_contact": [bool(p.foot_contact[0]), bool(p.foot_contact[1])],
            "fsm": p.fsm,
            "goal": p.goal,
            "latent": p.latent,
            "rewards": p.rewards,
        })
    events = []
    for e in frame.events:
        events.append({
            "tick": e.tick, "player": e.player, "part": e.part,
            "pos": _vec(e.pos), "pre_vel": _vec(e.pre_vel), "post_vel": _vec(e.post_vel),
            "degenerate": e.degenerate,
        })
    return {"tick": frame.tick, "ball": ball, "players": players, "events": events}


def frame_from_json(obj: dict) -> Frame:
    ball = None
    if obj["ball"] is not None:
        b = obj["ball"]
        ball = BallState(SpatialVec(*b["pos"]), SpatialVec(*b["vel"]), SpatialVec(*b["ang_vel"]),
                         b["radius"], b["mass"])
    players = []
    for p in obj["players"]:
        players.append(PlayerFrame(
            SpatialVec(*p["root_pos"]),
            SpatialVec(*p["root_vel"]),
            PlanarVec(*p["facing"]),
            (SpatialVec(*p["foot_pos"][0]), SpatialVec(*p["foot_pos"][1])),
            (SpatialVec(*p["foot_vel"][0]), SpatialVec(*p["foot_vel"][1])),
            (p["foot_contact"][0], p["foot_contact"][1]),
            p["fsm"],
            p["goal"],
            p["latent"],
            p["rewards"],
        ))
    events = []
    for e in obj["events"]:
        events.append(CollisionEvent(
            e["tick"], e["player"], e["part"], SpatialVec(*e["pos"]),
            SpatialVec(*e["pre_vel"]), SpatialVec(*e["post_vel"]), e["degenerate"],
        ))
    return Frame(obj["tick"], ball, players, events)


def make_header(seed: int, cfg_hash: str, meta: dict | None = None) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "package_version": PACKAGE_VERSION,
        "config_hash": cfg_hash,
        "seed": seed,
        "meta": meta or {},
    }


def save(path: str | Path, traj: Trajectory) -> None:
    with open(path, "w") as fh:
        fh.write(json.dumps(traj.header, sort_keys=True) + "\n")
        for frame in traj.frames:
            fh.write(json.dumps(frame_to_json(frame), sort_keys=True) + "\n")


def load(path: str | Path) -> Trajectory:
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ValueError(f"empty trajectory file: {path}")
    header = json.loads(lines[0])
    if header.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"unsupported trajectory format version in {path}")
    frames = [frame_from_json(json.loads(line)) for line in lines[1:]]
    prev = -1
    for f in frames:
        if f.tick <= prev:
            raise ValueError("trajectory ticks must be strictly increasing")
        prev = f.tick
    return Trajectory(header, frames)
