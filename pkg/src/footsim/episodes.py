"""Goal sampling, episode initialization, termination rules, and the rollout loop.

Lob passes are initialized by inverting the closed-form projectile relations so
the ball lands at a sampled point near the character; ground passes launch at a
low angle from a speed-proportional distance.  Snapshot buffers store states
from predecessor-skill rollouts so later skills train straight into
transitions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable

import numpy as np

from .core import (
    BODY_PARTS,
    TRAP_FEET,
    BallState,
    CharacterState,
    PlanarVec,
    SpatialVec,
    horizontal_distance,
    rest_pose,
)
from .motion import GaitParams, LatentCodec, RefBuffer
from .rewards import (
    RewardConfig,
    DEFAULT_REWARDS,
    dribble_reward,
    kick_reward,
    move_reward,
    trap_reward,
)
from .sim import CollisionEvent, SimConfig, World, control_step

SKILLS = ("move", "trap", "dribble", "kick")

# control-tick timing at 30 Hz
EPISODE_TICKS = 300  # 10 s
KICK_TIMEOUT_TICKS = 90  # 3 s without contact
TRAP_POST_TICKS = 5  # 1/6 s after first contact
KICK_WINDOW_TICKS = 10  # 1/3 s after first contact
GOAL_RESET_RANGE = (5.0, 6.5)  # s

BALL_RADIUS = 0.11


# ---------------------------------------------------------------------------
# goals
# ---------------------------------------------------------------------------

@dataclass(slots=True)
class DribbleGoal:
    velocity: PlanarVec

    def to_json(self) -> dict:
        return {"skill": "dribble", "velocity": list(self.velocity)}


@dataclass(slots=True)
class TrapGoal:
    body_part: str

    def to_json(self) -> dict:
        return {"skill": "trap", "body_part": self.body_part}


@dataclass(slots=True)
class MoveGoal:
    velocity: PlanarVec
    facing: PlanarVec
    guided: bool = False
    ref_latent: np.ndarray | None = None
    ref_name: str = ""

    def to_json(self) -> dict:
        return {
            "skill": "move",
            "velocity": list(self.velocity),
            "facing": list(self.facing),
            "guided": self.guided,
            "ref_name": self.ref_name,
        }


@dataclass(slots=True)
class KickGoal:
    velocity: SpatialVec  # world frame

    def to_json(self) -> dict:
        return {"skill": "kick", "velocity": list(self.velocity)}


SkillGoal = DribbleGoal | TrapGoal | MoveGoal | KickGoal


def sample_goal(
    skill: str,
    rng: np.random.Generator,
    mode: str = "general",
    ref_buffer: RefBuffer | None = None,
    pass_kind: str = "lob",
    facing: PlanarVec = PlanarVec(1.0, 0.0),
) -> SkillGoal:
    """Sample a goal from the skill's training distribution.

    Guided mode (move only) returns a reference pair's goal along with its
    latent.  Kick goals sample relative to the supplied facing direction.
    """
    if skill == "dribble":
        speed = rng.uniform(0.0, 7.0)
        theta = rng.uniform(0.0, 2.0 * math.pi)
        return DribbleGoal(PlanarVec(speed * math.cos(theta), speed * math.sin(theta)))
    if skill == "trap":
        parts = BODY_PARTS if pass_kind == "lob" else TRAP_FEET
        return TrapGoal(parts[int(rng.integers(len(parts)))])
    if skill == "move":
        if mode == "guided":
            if ref_buffer is None:
                raise ValueError("guided goal sampling requires a reference buffer")
            pair = ref_buffer.sample(rng)
            return MoveGoal(
                pair.ref_goal.move_vel, pair.ref_goal.face_dir,
                guided=True, ref_latent=pair.ref_latent, ref_name=pair.name,
            )
        speed = rng.uniform(0.0, 7.0)
        tv = rng.uniform(0.0, 2.0 * math.pi)
        tf = rng.uniform(0.0, 2.0 * math.pi)
        return MoveGoal(
            PlanarVec(speed * math.cos(tv), speed * math.sin(tv)),
            PlanarVec(math.cos(tf), math.sin(tf)),
        )
    if skill == "kick":
        h = rng.uniform(math.radians(-45.0), math.radians(45.0))
        v = rng.uniform(0.0, math.radians(45.0))
        speed = rng.uniform(5.0, 35.0)
        base = math.atan2(facing.y, facing.x) + h
        cv = math.cos(v)
        return KickGoal(
            SpatialVec(
                speed * cv * math.cos(base),
                speed * cv * math.sin(base),
                speed * math.sin(v),
            )
        )
    raise ValueError(f"unknown skill {skill!r}")


# ---------------------------------------------------------------------------
# projectile initialization
# ---------------------------------------------------------------------------

def lob_flight(v0: float, phi: float, g: float = 9.8) -> tuple[float, float]:
    """(horizontal distance, flight time) for equal launch/landing heights."""
    t = 2.0 * v0 * math.sin(phi) / g
    d = v0 * v0 * math.sin(2.0 * phi) / g
    return d, t


@dataclass(slots=True)
class LobSpec:
    v0: float
    phi: float
    landing: PlanarVec
    spin: SpatialVec

    def __post_init__(self):
        if not 10.0 <= self.v0 <= 30.0:
            raise ValueError("lob launch speed out of range [10, 30] m/s")
        if not math.radians(10.0) - 1e-9 <= self.phi <= math.radians(45.0) + 1e-9:
            raise ValueError("lob launch angle out of range [10, 45] deg")


def _landing_sector_sample(char: CharacterState, flight_time: float, rng) -> PlanarVec:
    # sector of the unit disc spanning +-45 deg around the movement direction,
    # centered at the position the character will reach during the flight
    hv = char.root_vel.horizontal()
    speed = hv.norm()
    if speed > 1e-6:
        base = math.atan2(hv.y, hv.x)
    else:
        base = math.atan2(char.facing.y, char.facing.x)
    cx = char.root_pos.x + hv.x * flight_time
    cy = char.root_pos.y + hv.y * flight_time
    ang = base + rng.uniform(-math.pi / 4.0, math.pi / 4.0)
    rad = math.sqrt(rng.uniform(0.0, 1.0))  # area-uniform
    return PlanarVec(cx + rad * math.cos(ang), cy + rad * math.sin(ang))


def make_lob_spec(char: CharacterState, rng, g: float = 9.8) -> LobSpec:
    v0 = rng.uniform(10.0, 30.0)
    phi = rng.uniform(math.radians(10.0), math.radians(45.0))
    _, t = lob_flight(v0, phi, g)
    landing = _landing_sector_sample(char, t, rng)
    axis = rng.normal(size=3)
    axis /= np.linalg.norm(axis)
    spin_mag = rng.uniform(0.0, 80.0)
    spin = SpatialVec(*(axis * spin_mag))
    return LobSpec(v0, phi, landing, spin)


def init_lob_pass(char: CharacterState, rng, g: float = 9.8) -> tuple[BallState, LobSpec]:
    """Launch state that lands at a sampled point near the character.

    Launch and landing heights both equal the ball radius; the launch point
    offsets the landing point by the closed-form range in a random direction.
    """
    spec = make_lob_spec(char, rng, g)
    d, _ = lob_flight(spec.v0, spec.phi, g)
    psi = rng.uniform(0.0, 2.0 * math.pi)
    p0 = PlanarVec(spec.landing.x + d * math.cos(psi), spec.landing.y + d * math.sin(psi))
    ux, uy = (spec.landing.x - p0.x) / d, (spec.landing.y - p0.y) / d
    vh = spec.v0 * math.cos(spec.phi)
    ball = BallState(
        SpatialVec(p0.x, p0.y, BALL_RADIUS),
        SpatialVec(vh * ux, vh * uy, spec.v0 * math.sin(spec.phi)),
        spec.spin,
    )
    return ball, spec


def init_ground_pass(char: CharacterState, rng) -> tuple[BallState, PlanarVec]:
    """Low-angle pass launched from a speed-proportional distance at the target.

    Returns the ball plus the unit travel direction (used by the beyond-the-
    character failure rule).
    """
    v0 = rng.uniform(10.0, 30.0)
    dist = 15.0 + (v0 - 10.0) / 20.0 * 30.0  # linear endpoints: d = 1.5 v0
    t_est = dist / v0
    target = _landing_sector_sample(char, t_est, rng)
    psi = rng.uniform(0.0, 2.0 * math.pi)
    p0 = PlanarVec(target.x + dist * math.cos(psi), target.y + dist * math.sin(psi))
    height = rng.uniform(BALL_RADIUS, 0.5)
    phi = rng.uniform(0.0, math.radians(10.0))
    ux, uy = (target.x - p0.x) / dist, (target.y - p0.y) / dist
    vh = v0 * math.cos(phi)
    ball = BallState(
        SpatialVec(p0.x, p0.y, height),
        SpatialVec(vh * ux, vh * uy, v0 * math.sin(phi)),
    )
    return ball, PlanarVec(ux, uy)


# ---------------------------------------------------------------------------
# snapshot (STI) buffers
# ---------------------------------------------------------------------------

SNAPSHOT_FLOATS = 44
DEFAULT_BUFFER_CAPACITY = 5000  # desk-scale default; capacity is configurable


@dataclass(slots=True)
class Snapshot:
    char: CharacterState
    ball: BallState | None
    source_skill: str
    tick_tag: int = 0

    def __post_init__(self):
        if self.source_skill == "trap" and self.ball is None:
            raise ValueError("trap snapshots must carry a ball")
        if self.source_skill == "move" and self.ball is not None:
            raise ValueError("move snapshots never carry a ball")


def _snapshot_to_row(s: Snapshot) -> np.ndarray:
    c = s.char
    row = np.empty(SNAPSHOT_FLOATS)
    row[0:3] = c.root_pos
    row[3:6] = c.root_vel
    row[6:8] = c.facing
    row[8] = c.facing_rate
    row[9] = c.gait_phase
    row[10:13] = c.foot_pos[0]
    row[13:16] = c.foot_pos[1]
    row[16:19] = c.foot_vel[0]
    row[19:22] = c.foot_vel[1]
    row[22] = 1.0 if c.foot_contact[0] else 0.0
    row[23] = 1.0 if c.foot_contact[1] else 0.0
    row[24] = float(c.strike_foot)
    row[25:28] = c.strike_disp
    row[28:31] = c.strike_base
    if s.ball is None:
        row[31:43] = 0.0
    else:
        b = s.ball
        row[31] = 1.0
        row[32:35] = b.pos
        row[35:38] = b.vel
        row[38:41] = b.ang_vel
        row[41] = b.radius
        row[42] = b.mass
    row[43] = float(s.tick_tag)
    return row


def _snapshot_from_row(row: np.ndarray, source_skill: str) -> Snapshot:
    char = CharacterState(
        root_pos=SpatialVec(*row[0:3]),
        root_vel=SpatialVec(*row[3:6]),
        facing=PlanarVec(*row[6:8]),
        facing_rate=float(row[8]),
        gait_phase=float(row[9]),
        foot_pos=(SpatialVec(*row[10:13]), SpatialVec(*row[13:16])),
        foot_vel=(SpatialVec(*row[16:19]), SpatialVec(*row[19:22])),
        foot_contact=(row[22] > 0.5, row[23] > 0.5),
        strike_foot=int(row[24]),
        strike_disp=SpatialVec(*row[25:28]),
        strike_base=SpatialVec(*row[28:31]),
    )
    ball = None
    if row[31] > 0.5:
        ball = BallState(
            SpatialVec(*row[32:35]), SpatialVec(*row[35:38]), SpatialVec(*row[38:41]),
            float(row[41]), float(row[42]),
        )
    return Snapshot(char, ball, source_skill, int(row[43]))


@dataclass
class StiBuffer:
    """Homogeneous snapshot store sampled uniformly with the run's generator."""

    source_skill: str
    snapshots: list[Snapshot] = field(default_factory=list)
    capacity: int = DEFAULT_BUFFER_CAPACITY

    def add(self, snap: Snapshot) -> None:
        if snap.source_skill != self.source_skill:
            raise ValueError("snapshot source does not match buffer")
        if len(self.snapshots) < self.capacity:
            self.snapshots.append(snap)

    def __len__(self) -> int:
        return len(self.snapshots)

    def sample(self, rng) -> Snapshot:
        return self.snapshots[int(rng.integers(len(self.snapshots)))]

    def subsample(self, count: int, rng) -> "StiBuffer":
        idx = rng.choice(len(self.snapshots), size=min(count, len(self.snapshots)), replace=False)
        out = StiBuffer(self.source_skill, capacity=count)
        for i in sorted(int(i) for i in idx):
            out.snapshots.append(self.snapshots[i])
        return out

    def save(self, path: str | Path, seed: int = 0, cfg_hash: str = "none") -> None:
        header = (
            f"footsim-sti v1 skill={self.source_skill} count={len(self.snapshots)} "
            f"seed={seed} config={cfg_hash}\n"
        )
        rows = np.stack([_snapshot_to_row(s) for s in self.snapshots]) if self.snapshots else \
            np.empty((0, SNAPSHOT_FLOATS))
        with open(path, "wb") as fh:
            fh.write(header.encode())
            fh.write(rows.astype("<f8").tobytes())

    @classmethod
    def load(cls, path: str | Path) -> "StiBuffer":
        with open(path, "rb") as fh:
            header = fh.readline().decode().strip()
            body = fh.read()
        fields_ = dict(kv.split("=") for kv in header.split()[2:])
        if not header.startswith("footsim-sti v1"):
            raise ValueError(f"unrecognized snapshot buffer header: {header!r}")
        count = int(fields_["count"])
        skill = fields_["skill"]
        rows = np.frombuffer(body, dtype="<f8").reshape(count, SNAPSHOT_FLOATS)
        buf = cls(skill, capacity=max(count, 1))
        for row in rows:
            buf.snapshots.append(_snapshot_from_row(row, skill))
        return buf


# ---------------------------------------------------------------------------
# episode initialization / termination
# ---------------------------------------------------------------------------

@dataclass(slots=True)
class EpisodeContext:
    skill: str
    pass_kind: str = ""  # trap only: "lob" | "ground"
    travel_dir: PlanarVec | None = None  # ground pass initial direction
    init_source: str = ""  # which buffer / rest pose seeded the episode
    first_contact: int | None = None  # control tick of first ball-body contact
    handball: bool = False
    grounded_before_contact: bool = False


BUFFER_PREREQS = {
    "move": (),
    "trap": ("move",),
    "dribble": ("move", "trap"),
    "kick": ("dribble",),
}


def _require(buffers: dict[str, StiBuffer] | None, names: tuple[str, ...], skill: str):
    for name in names:
        if buffers is None or name not in buffers or len(buffers[name]) == 0:
            raise ValueError(
                f"{skill} episodes require a populated {name} snapshot buffer; "
                f"train the {name} policy first"
            )


def init_episode(
    skill: str,
    buffers: dict[str, StiBuffer] | None,
    rng: np.random.Generator,
    sim_cfg: SimConfig | None = None,
    trap_stage: int = 2,
) -> tuple[World, EpisodeContext]:
    """Build the starting world per the skill's initialization mixture."""
    sim_cfg = sim_cfg or SimConfig()
    ctx = EpisodeContext(skill)
    if skill == "move":
        world = World(None, [rest_pose()])
        ctx.init_source = "rest"
    elif skill == "trap":
        _require(buffers, ("move",), "trap")
        snap = buffers["move"].sample(rng)
        char = snap.char.copy()
        if trap_stage == 1 or rng.random() < 0.8:
            ball, _ = init_lob_pass(char, rng, sim_cfg.gravity)
            ctx.pass_kind = "lob"
        else:
            ball, travel = init_ground_pass(char, rng)
            ctx.pass_kind = "ground"
            ctx.travel_dir = travel
        ctx.init_source = "move"
        world = World(ball, [char])
    elif skill == "dribble":
        _require(buffers, ("move", "trap"), "dribble")
        if rng.random() < 0.5:
            snap = buffers["trap"].sample(rng)
            char = snap.char.copy()
            ball = snap.ball.copy()
            ctx.init_source = "trap"
        else:
            snap = buffers["move"].sample(rng)
            char = snap.char.copy()
            ang = rng.uniform(0.0, 2.0 * math.pi)
            rad = math.sqrt(rng.uniform(0.0, 1.0))
            speed = rng.uniform(0.0, 1.0)
            vang = rng.uniform(0.0, 2.0 * math.pi)
            ball = BallState(
                SpatialVec(
                    char.root_pos.x + rad * math.cos(ang),
                    char.root_pos.y + rad * math.sin(ang),
                    BALL_RADIUS,
                ),
                SpatialVec(speed * math.cos(vang), speed * math.sin(vang), 0.0),
            )
            ctx.init_source = "move"
        world = World(ball, [char])
    elif skill == "kick":
        _require(buffers, ("dribble",), "kick")
        if rng.random() < 0.7:
            snap = buffers["dribble"].sample(rng)
            char = snap.char.copy()
            ball = snap.ball.copy()
            ctx.init_source = "dribble"
        else:
            char = rest_pose()
            ang = rng.uniform(0.0, 2.0 * math.pi)
            rad = 2.0 * math.sqrt(rng.uniform(0.0, 1.0))
            ball = BallState(
                SpatialVec(rad * math.cos(ang), rad * math.sin(ang), BALL_RADIUS),
                SpatialVec(0.0, 0.0, 0.0),
            )
            ctx.init_source = "rest"
        world = World(ball, [char])
    else:
        raise ValueError(f"unknown skill {skill!r}")
    return world, ctx


@dataclass(slots=True)
class Outcome:
    kind: str  # "continue" | "early_stop" | "timeout"
    reason: str = ""

    @property
    def done(self) -> bool:
        return self.kind != "continue"


CONTINUE = Outcome("continue")


def update_context(ctx: EpisodeContext, clock: int, events: list[CollisionEvent], player: int = 0):
    """Fold this control tick's events into the episode bookkeeping.

    A body contact in the same tick as a ground contact counts as a touch
    before grounding.
    """
    for e in events:
        if e.player == player:
            if e.part.startswith("handball"):
                ctx.handball = True
            if ctx.first_contact is None:
                ctx.first_contact = clock
    if ctx.first_contact is None and ctx.skill == "trap" and ctx.pass_kind == "lob":
        if any(e.player == -1 and e.part == "ground" for e in events):
            ctx.grounded_before_contact = True


def check_termination(
    skill: str,
    world: World,
    clock: int,
    ctx: EpisodeContext,
    max_ticks: int = EPISODE_TICKS,
) -> Outcome:
    """Apply the per-skill stop rules at the current control tick."""
    char = world.players[0]
    if skill == "dribble":
        if horizontal_distance(world.ball.pos, char.root_pos) > 3.0:
            return Outcome("early_stop", "ball_lost")
        if clock >= max_ticks:
            return Outcome("timeout")
        return CONTINUE
    if skill == "trap":
        if ctx.handball:
            return Outcome("early_stop", "handball")
        if ctx.grounded_before_contact:
            return Outcome("early_stop", "ball_grounded")
        if (
            ctx.pass_kind == "ground"
            and ctx.first_contact is None
            and ctx.travel_dir is not None
        ):
            d = ctx.travel_dir
            ball_proj = world.ball.pos.x * d.x + world.ball.pos.y * d.y
            char_proj = char.root_pos.x * d.x + char.root_pos.y * d.y
            if ball_proj > char_proj + 0.5:
                return Outcome("early_stop", "ball_passed")
        if ctx.first_contact is not None and clock >= ctx.first_contact + TRAP_POST_TICKS:
            return Outcome("early_stop", "completed")
        if clock >= max_ticks:
            return Outcome("timeout")
        return CONTINUE
    if skill == "move":
        if clock >= max_ticks:
            return Outcome("timeout")
        return CONTINUE
    if skill == "kick":
        if ctx.first_contact is not None and clock >= ctx.first_contact + KICK_WINDOW_TICKS:
            return Outcome("early_stop", "completed")
        if ctx.first_contact is None and clock >= min(KICK_TIMEOUT_TICKS, max_ticks):
            return Outcome("timeout")
        return CONTINUE
    raise ValueError(f"unknown skill {skill!r}")


# ---------------------------------------------------------------------------
# rollout loop
# ---------------------------------------------------------------------------

PolicyFn = Callable[[CharacterState, BallState | None, SkillGoal], np.ndarray]


@dataclass
class EpisodeResult:
    return_: float
    ticks: int
    outcome: Outcome
    snapshots: list[Snapshot] = field(default_factory=list)
    frames: list = field(default_factory=list)
    reward_sum_by_part: dict = field(default_factory=dict)


def compute_reward(
    skill: str,
    goal: SkillGoal,
    world: World,
    ctx: EpisodeContext,
    clock: int,
    latent,
    cfg: RewardConfig = DEFAULT_REWARDS,
) -> tuple[float, dict]:
    char = world.players[0]
    if skill == "dribble":
        return dribble_reward(goal.velocity, world.ball, char, cfg)
    if skill == "trap":
        collided = ctx.first_contact is not None
        in_window = collided and clock <= ctx.first_contact + TRAP_POST_TICKS
        if collided and not in_window:
            return 0.0, {}
        r = trap_reward(goal.body_part, world.ball, char, collided, cfg)
        return r, {"phase": float(collided)}
    if skill == "move":
        total, parts = move_reward(
            goal.velocity, goal.facing, char, goal.guided, goal.ref_latent, latent, cfg
        )
        return total, parts
    if skill == "kick":
        if ctx.first_contact is None or clock > ctx.first_contact + KICK_WINDOW_TICKS:
            return 0.0, {}
        return kick_reward(goal.velocity, world.ball, cfg), {}
    raise ValueError(f"unknown skill {skill!r}")


def run_episode(
    skill: str,
    world: World,
    goal: SkillGoal,
    ctx: EpisodeContext,
    policy: PolicyFn,
    codec: LatentCodec,
    sim_cfg: SimConfig,
    rng: np.random.Generator,
    reward_cfg: RewardConfig = DEFAULT_REWARDS,
    max_ticks: int = EPISODE_TICKS,
    goal_resampler: Callable[[np.random.Generator], SkillGoal] | None = None,
    collect_snapshots: bool = False,
    record_frames: bool = False,
) -> EpisodeResult:
    """Roll one episode at the control rate; returns the summed reward.

    Dribble/move goals are reassigned once at a random time in [5, 6.5] s when
    a resampler is supplied and the episode lasts that long.
    """
    from .trajectory import Frame, PlayerFrame  # local import avoids cycles

    reset_tick = None
    if goal_resampler is not None and skill in ("dribble", "move"):
        reset_tick = int(rng.uniform(*GOAL_RESET_RANGE) * 30.0)

    char = world.players[0]
    total = 0.0
    part_sums: dict[str, float] = {}
    snapshots: list[Snapshot] = []
    frames: list = []
    clock = 0
    outcome = CONTINUE
    while True:
        if reset_tick is not None and clock == reset_tick:
            goal = goal_resampler(rng)
        latent = policy(char, world.ball, goal)
        params = codec.decode(latent)
        events = control_step(world, sim_cfg, [params])
        clock += 1
        update_context(ctx, clock, events, player=0)
        reward, parts = compute_reward(skill, goal, world, ctx, clock, latent, reward_cfg)
        total += reward
        for k, v in parts.items():
            part_sums[k] = part_sums.get(k, 0.0) + v

        if collect_snapshots:
            if skill in ("move", "dribble"):
                snapshots.append(
                    Snapshot(
                        char.copy(),
                        world.ball.copy() if skill == "dribble" else None,
                        skill,
                        world.tick,
                    )
                )
            elif skill == "trap" and any(e.player == 0 for e in events):
                snapshots.append(Snapshot(char.copy(), world.ball.copy(), skill, world.tick))

        if record_frames:
            frames.append(
                Frame(
                    world.tick // sim_cfg.control_divisor,  # control tick index
                    world.ball.copy() if world.ball is not None else None,
                    [PlayerFrame.capture(char, skill, goal.to_json(), latent, dict(parts, total=reward))],
                    list(events),
                )
            )

        outcome = check_termination(skill, world, clock, ctx, max_ticks)
        if outcome.done:
            break
    return EpisodeResult(total, clock, outcome, snapshots, frames, part_sums)
