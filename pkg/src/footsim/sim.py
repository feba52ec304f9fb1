"""Deterministic fixed-timestep physics for the ball and the character surrogate.

The ball integrates with exact constant-acceleration updates plus a
time-of-impact sub-step at the ground plane, so drag-free flights match the
closed-form trajectory to float precision.  Characters are kinematic: the root
follows decoded gait commands with an acceleration limit, feet follow a phase
oscillator clamped to the ground, and kick swings sweep the striking foot.
Pairwise friction and restitution are the averages of the two bodies'
coefficients.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from typing import Sequence

from .core import (
    BODY_SPHERE_RADII,
    FOOT_RADIUS,
    HANDBALL_RADIUS,
    ROOT_HEIGHT,
    BallState,
    CharacterState,
    PlanarVec,
    SpatialVec,
)
from .motion import GaitParams

CHAR_ACCEL = 12.0  # m/s^2, root velocity ramp limit
REST_SPEED = 0.15  # m/s, vertical speed below which ground contact is resting
STRIKE_REACH = 0.7  # m, max kick-swing foot displacement
IDLE_SPEED = 0.05

HOLD = GaitParams(0.0, 0.0, 0.0, 1.0, 0.0, None)


class SimulationError(RuntimeError):
    pass


@dataclass(slots=True)
class SimConfig:
    dt_sim: float = 1.0 / 60.0
    control_divisor: int = 2  # control at 30 Hz
    gravity: float = 9.8
    ball_friction: float = 0.2
    ball_rolling_friction: float = 0.2
    ball_restitution: float = 0.8
    ball_linear_damping: float = 0.1
    ball_angular_damping: float = 0.05
    ground_friction: float = 1.0
    ground_restitution: float = 0.2
    character_friction: float = 1.0
    character_restitution: float = 0.0
    penetration_tol: float = 1e-4
    seed: int = 0

    def __post_init__(self):
        if self.dt_sim <= 0:
            raise ValueError("dt_sim must be positive")
        for f in fields(self):
            if f.name in ("seed", "control_divisor"):
                continue
            if getattr(self, f.name) < 0:
                raise ValueError(f"{f.name} must be >= 0")
        for name in ("ball_restitution", "ground_restitution", "character_restitution"):
            if getattr(self, name) > 1:
                raise ValueError(f"{name} must be <= 1")

    @property
    def dt_control(self) -> float:
        return self.dt_sim * self.control_divisor

    def ground_pair_restitution(self) -> float:
        return 0.5 * (self.ball_restitution + self.ground_restitution)

    def ground_pair_friction(self) -> float:
        return 0.5 * (self.ball_friction + self.ground_friction)

    def body_pair_restitution(self) -> float:
        return 0.5 * (self.ball_restitution + self.character_restitution)

    def body_friction_blend(self) -> float:
        return min(1.0, 0.5 * (self.ball_friction + self.character_friction))


@dataclass(slots=True)
class CollisionEvent:
    tick: int
    player: int  # -1 for the ground plane
    part: str
    pos: SpatialVec
    pre_vel: SpatialVec
    post_vel: SpatialVec
    degenerate: bool = False


@dataclass
class World:
    ball: BallState | None  # None for ball-free (pure movement) episodes
    players: list[CharacterState]
    tick: int = 0
    events: list[CollisionEvent] = field(default_factory=list)
    rng: object = None  # consumed by episode logic, never by step()

    def copy(self) -> "World":
        ball = self.ball.copy() if self.ball is not None else None
        w = World(ball, [p.copy() for p in self.players], self.tick)
        w.rng = self.rng
        return w


def resolve_ball_body(
    ball: BallState,
    body_pos: SpatialVec,
    body_vel: SpatialVec,
    body_radius: float,
    restitution_eff: float,
    friction_blend: float = 0.6,
    fallback_normal: SpatialVec = SpatialVec(1.0, 0.0, 0.0),
) -> tuple[BallState, dict]:
    """Kinematic-striker impulse on the ball from a body sphere.

    Normal runs from the body point to the ball center; the ball's normal
    velocity becomes (1+e)(v_body.n) - e(v_ball.n) and relative tangential
    velocity is scaled by (1 - friction_blend).  Coincident centers resolve
    along the supplied fallback direction and flag the event as degenerate.
    """
    delta = ball.pos.sub(body_pos)
    dist = delta.norm()
    degenerate = dist < 1e-12
    if degenerate:
        n = fallback_normal
    else:
        n = delta.scaled(1.0 / dist)
    vn_ball = ball.vel.dot(n)
    vn_body = body_vel.dot(n)
    vn_after = (1.0 + restitution_eff) * vn_body - restitution_eff * vn_ball
    t_ball = ball.vel.sub(n.scaled(vn_ball))
    t_body = body_vel.sub(n.scaled(vn_body))
    t_after = t_body.add(t_ball.sub(t_body).scaled(1.0 - friction_blend))
    new_vel = t_after.add(n.scaled(vn_after))
    contact_sep = body_radius + ball.radius
    new_pos = body_pos.add(n.scaled(contact_sep))
    out = BallState(new_pos, new_vel, ball.ang_vel, ball.radius, ball.mass)
    info = {"pre_vel": ball.vel, "post_vel": new_vel, "pos": new_pos, "degenerate": degenerate}
    return out, info


def _integrate_character(char: CharacterState, cmd: GaitParams, dt: float) -> None:
    rate = min(max(cmd.facing_rate, -3.0), 3.0)
    if rate != 0.0:
        ang = math.atan2(char.facing.y, char.facing.x) + rate * dt
        char.facing = PlanarVec(math.cos(ang), math.sin(ang))
    char.facing_rate = rate

    ch, sh = math.cos(cmd.heading), math.sin(cmd.heading)
    fx, fy = char.facing
    dir_x = ch * fx - sh * fy
    dir_y = ch * fy + sh * fx
    tx, ty = cmd.target_speed * dir_x, cmd.target_speed * dir_y
    vx, vy = char.root_vel.x, char.root_vel.y
    dvx, dvy = tx - vx, ty - vy
    dvn = math.hypot(dvx, dvy)
    max_dv = CHAR_ACCEL * dt
    if dvn > max_dv:
        k = max_dv / dvn
        vx += dvx * k
        vy += dvy * k
    else:
        vx, vy = tx, ty
    char.root_vel = SpatialVec(vx, vy, 0.0)
    char.root_pos = SpatialVec(
        char.root_pos.x + vx * dt, char.root_pos.y + vy * dt, ROOT_HEIGHT
    )

    speed = math.hypot(vx, vy)
    stepping = cmd.target_speed > IDLE_SPEED or speed > IDLE_SPEED
    if stepping:
        char.gait_phase = (char.gait_phase + cmd.step_frequency * dt) % 1.0

    if speed > IDLE_SPEED:
        mx, my = vx / speed, vy / speed
    else:
        mx, my = fx, fy
    amp_cap = 0.1 + 0.35 * cmd.step_length_scale
    amp = min(speed / (4.0 * cmd.step_frequency), amp_cap) if stepping else 0.0
    lift = 0.04 + 0.06 * cmd.step_length_scale

    feet_pos = []
    feet_vel = []
    contacts = []
    for i, lat in enumerate((0.12, -0.12)):
        base_x = char.root_pos.x - fy * lat
        base_y = char.root_pos.y + fx * lat
        p = char.gait_phase if i == 0 else (char.gait_phase + 0.5) % 1.0
        if amp < 1e-3:
            off, d_off, z, dz, contact = 0.0, 0.0, 0.05, 0.0, True
        elif p < 0.5:  # stance: foot travels back under the advancing root
            off = amp * (1.0 - 4.0 * p)
            d_off = -4.0 * amp * cmd.step_frequency
            z, dz, contact = 0.05, 0.0, True
        else:  # swing: forward and lifted
            q = p - 0.5
            off = -amp + 4.0 * amp * q
            d_off = 4.0 * amp * cmd.step_frequency
            z = 0.05 + lift * math.sin(2.0 * math.pi * q)
            dz = lift * 2.0 * math.pi * cmd.step_frequency * math.cos(2.0 * math.pi * q)
            contact = False
        pos = SpatialVec(base_x + mx * off, base_y + my * off, z)
        vel = SpatialVec(vx + mx * d_off, vy + my * d_off, dz)
        feet_pos.append(pos)
        feet_vel.append(vel)
        contacts.append(contact)

    # kick swing: the commanded foot sweeps along the strike direction from a
    # base frozen at strike start
    kick = cmd.kick_swing
    if kick is not None:
        idx = 0 if kick.foot == "L" else 1
        if char.strike_foot != idx:
            char.strike_foot = idx
            char.strike_disp = SpatialVec(0.0, 0.0, 0.0)
            char.strike_base = feet_pos[idx]
        disp = char.strike_disp.add(kick.direction.scaled(kick.speed * dt))
        if disp.norm() > STRIKE_REACH:
            disp = disp.scaled(STRIKE_REACH / disp.norm())
        char.strike_disp = disp
        base = char.strike_base
        z = max(base.z + disp.z, 0.02)
        feet_pos[idx] = SpatialVec(base.x + disp.x, base.y + disp.y, z)
        feet_vel[idx] = kick.direction.scaled(kick.speed)
        contacts[idx] = False
    else:
        char.strike_foot = -1
        char.strike_disp = SpatialVec(0.0, 0.0, 0.0)

    char.foot_pos = (feet_pos[0], feet_pos[1])
    char.foot_vel = (feet_vel[0], feet_vel[1])
    char.foot_contact = (contacts[0], contacts[1])


def _integrate_ball(ball: BallState, cfg: SimConfig, events: list, tick: int) -> None:
    dt = cfg.dt_sim
    g = cfg.gravity
    r = ball.radius
    pos, vel = ball.pos, ball.vel

    resting = (pos.z - r) < 1e-6 and abs(vel.z) < REST_SPEED
    if resting:
        hs = math.hypot(vel.x, vel.y)
        if hs > 0.0:
            decel = cfg.ball_rolling_friction * g * dt
            k = max(0.0, hs - decel) / hs
            vel = SpatialVec(vel.x * k, vel.y * k, 0.0)
        else:
            vel = SpatialVec(0.0, 0.0, 0.0)
        damp = math.exp(-cfg.ball_linear_damping * dt)
        vel = vel.scaled(damp)
        ball.pos = SpatialVec(pos.x + vel.x * dt, pos.y + vel.y * dt, r)
        ball.vel = vel
        spin = math.exp(-(cfg.ball_angular_damping + 2.0 * cfg.ball_rolling_friction) * dt)
        ball.ang_vel = ball.ang_vel.scaled(spin)
        return

    # ballistic segment, exact for constant acceleration
    new_z = pos.z + vel.z * dt - 0.5 * g * dt * dt
    if new_z >= r:
        ball.pos = SpatialVec(pos.x + vel.x * dt, pos.y + vel.y * dt, new_z)
        vz = vel.z - g * dt
        damp = math.exp(-cfg.ball_linear_damping * dt)
        ball.vel = SpatialVec(vel.x * damp, vel.y * damp, vz * damp)
        ball.ang_vel = ball.ang_vel.scaled(math.exp(-cfg.ball_angular_damping * dt))
        return

    # ground impact within this tick: solve the crossing time exactly
    disc = vel.z * vel.z + 2.0 * g * (pos.z - r)
    t_hit = (vel.z + math.sqrt(max(disc, 0.0))) / g
    t_hit = min(max(t_hit, 0.0), dt)
    hit_x = pos.x + vel.x * t_hit
    hit_y = pos.y + vel.y * t_hit
    vz_imp = vel.z - g * t_hit
    pre = SpatialVec(vel.x, vel.y, vz_imp)

    e = cfg.ground_pair_restitution()
    mu = cfg.ground_pair_friction()
    if abs(vz_imp) < REST_SPEED:
        vz_out = 0.0
    else:
        vz_out = -e * vz_imp
    ht = math.hypot(vel.x, vel.y)
    if ht > 0.0:
        dv_t = min(mu * (1.0 + e) * abs(vz_imp), ht)
        k = (ht - dv_t) / ht
    else:
        k = 0.0
    vx, vy = vel.x * k, vel.y * k
    post = SpatialVec(vx, vy, vz_out)
    events.append(CollisionEvent(tick, -1, "ground", SpatialVec(hit_x, hit_y, r), pre, post))

    tau = dt - t_hit
    z2 = r + vz_out * tau - 0.5 * g * tau * tau
    vz2 = vz_out - g * tau
    if z2 < r:  # bounce too small to clear the ground within the tick
        z2, vz2 = r, 0.0
    damp = math.exp(-cfg.ball_linear_damping * dt)
    ball.pos = SpatialVec(hit_x + vx * tau, hit_y + vy * tau, z2)
    ball.vel = SpatialVec(vx * damp, vy * damp, vz2 * damp)
    spin_keep = 1.0 - 0.5 * min(1.0, mu)
    ball.ang_vel = ball.ang_vel.scaled(spin_keep * math.exp(-cfg.ball_angular_damping * dt))


def _segment_entry(r0: SpatialVec, r1: SpatialVec, r_sum: float) -> float | None:
    """First t in [0, 1] where the segment r(t) = r0 + t (r1 - r0) enters the
    contact radius, or None if it never does.  t = 0 when already inside."""
    if r0.norm() <= r_sum:
        return 0.0
    d = r1.sub(r0)
    a = d.dot(d)
    if a < 1e-18:
        return None
    b = 2.0 * r0.dot(d)
    c = r0.dot(r0) - r_sum * r_sum
    disc = b * b - 4.0 * a * c
    if disc < 0.0:
        return None
    t = (-b - math.sqrt(disc)) / (2.0 * a)
    if 0.0 <= t <= 1.0:
        return t
    return None


def _earliest_foot_entry(
    world: World, prev_pos: SpatialVec, prev_vel: SpatialVec, cfg: SimConfig
):
    """Earliest foot-sphere entry along the tick's pre-contact ballistic path.

    Returns (t_fraction, player, foot_index) or None.  Feet are treated as
    moving linearly at their current velocity across the tick.
    """
    ball = world.ball
    dt = cfg.dt_sim
    g = cfg.gravity
    end = SpatialVec(
        prev_pos.x + prev_vel.x * dt,
        prev_pos.y + prev_vel.y * dt,
        prev_pos.z + prev_vel.z * dt - 0.5 * g * dt * dt,
    )
    r_sum = FOOT_RADIUS + ball.radius
    best = None
    for pi, char in enumerate(world.players):
        for fi in range(2):
            fp, fv = char.foot_pos[fi], char.foot_vel[fi]
            prev_fp = SpatialVec(fp.x - fv.x * dt, fp.y - fv.y * dt, fp.z - fv.z * dt)
            r0 = prev_pos.sub(prev_fp)
            r1 = end.sub(fp)
            t = _segment_entry(r0, r1, r_sum)
            if t is not None and (best is None or t < best[0]):
                best = (t, pi, fi)
    return best


def _resolve_foot_entry(
    world: World, entry, prev_pos: SpatialVec, prev_vel: SpatialVec,
    cfg: SimConfig, events: list,
) -> None:
    """Advance the ball to the foot-entry time, apply the impulse, and finish
    the tick (ground sub-step included)."""
    t_frac, pi, fi = entry
    char = world.players[pi]
    dt = cfg.dt_sim
    tau = t_frac * dt
    g = cfg.gravity
    pos_e = SpatialVec(
        prev_pos.x + prev_vel.x * tau,
        prev_pos.y + prev_vel.y * tau,
        prev_pos.z + prev_vel.z * tau - 0.5 * g * tau * tau,
    )
    vel_e = SpatialVec(prev_vel.x, prev_vel.y, prev_vel.z - g * tau)
    fv = char.foot_vel[fi]
    fp = char.foot_pos[fi]
    foot_e = SpatialVec(
        fp.x - fv.x * (dt - tau), fp.y - fv.y * (dt - tau), fp.z - fv.z * (dt - tau)
    )
    ball = world.ball
    staged = BallState(pos_e, vel_e, ball.ang_vel, ball.radius, ball.mass)
    fallback = SpatialVec(char.facing.x, char.facing.y, 0.0)
    new_ball, info = resolve_ball_body(
        staged, foot_e, fv, FOOT_RADIUS, cfg.body_pair_restitution(),
        cfg.body_friction_blend(), fallback,
    )
    part = "foot_L" if fi == 0 else "foot_R"
    events.append(CollisionEvent(world.tick, pi, part, info["pos"], info["pre_vel"],
                                 info["post_vel"], info["degenerate"]))
    world.ball = new_ball
    rem = dt - tau
    if rem > 1e-9:
        saved_dt = cfg.dt_sim
        cfg.dt_sim = rem
        try:
            _integrate_ball(world.ball, cfg, events, world.tick)
        finally:
            cfg.dt_sim = saved_dt


def _body_contacts(
    world: World,
    player: int,
    char: CharacterState,
    prev_ball_pos: SpatialVec,
    cfg: SimConfig,
    events: list,
    skip_feet: bool = False,
) -> None:
    ball = world.ball
    e_body = cfg.body_pair_restitution()
    blend = cfg.body_friction_blend()
    dt = cfg.dt_sim
    fallback = SpatialVec(char.facing.x, char.facing.y, 0.0)

    # feet: swept test at the entry configuration, strikes can cross the ball
    # diameter in one tick
    if not skip_feet:
        for i, part in enumerate(("foot_L", "foot_R")):
            fp, fv = char.foot_pos[i], char.foot_vel[i]
            r_sum = FOOT_RADIUS + ball.radius
            prev_fp = SpatialVec(fp.x - fv.x * dt, fp.y - fv.y * dt, fp.z - fv.z * dt)
            r0 = prev_ball_pos.sub(prev_fp)
            r1 = ball.pos.sub(fp)
            t_entry = _segment_entry(r0, r1, r_sum)
            if t_entry is not None:
                rel_v = ball.vel.sub(fv)
                contact_delta = r0.add(r1.sub(r0).scaled(t_entry))
                cd = contact_delta.norm()
                n = contact_delta.scaled(1.0 / cd) if cd > 1e-12 else fallback
                # a strictly positive entry time implies approach; at zero the
                # spheres start overlapped, so require closing velocity
                if t_entry > 0.0 or rel_v.dot(n) < 0.0:
                    body_at_contact = ball.pos.sub(n.scaled(cd))
                    new_ball, info = resolve_ball_body(
                        ball, body_at_contact, fv, cd - ball.radius, e_body, blend, fallback
                    )
                    world.ball = ball = new_ball
                    events.append(
                        CollisionEvent(
                            world.tick, player, part, info["pos"], info["pre_vel"],
                            info["post_vel"], info["degenerate"],
                        )
                    )

    # torso-line spheres and handball zones: penetration test at current state
    spheres: list[tuple[str, SpatialVec, float]] = [
        (name, char.body_point(name), rad) for name, rad in BODY_SPHERE_RADII.items()
    ]
    hz = char.handball_zones()
    spheres.append(("handball_front", hz[0], HANDBALL_RADIUS))
    spheres.append(("handball_back", hz[1], HANDBALL_RADIUS))
    for part, center, rad in spheres:
        delta = ball.pos.sub(center)
        if delta.norm() < rad + ball.radius:
            rel_v = ball.vel.sub(char.root_vel)
            d = delta.norm()
            n = delta.scaled(1.0 / d) if d > 1e-12 else fallback
            if rel_v.dot(n) < 0.0:
                new_ball, info = resolve_ball_body(
                    ball, center, char.root_vel, rad, e_body, blend, fallback
                )
                world.ball = ball = new_ball
                events.append(
                    CollisionEvent(
                        world.tick, player, part, info["pos"], info["pre_vel"],
                        info["post_vel"], info["degenerate"],
                    )
                )


def step(world: World, cfg: SimConfig, commands: Sequence[GaitParams | None]) -> list[CollisionEvent]:
    """Advance one sim tick; returns (and stores) this tick's collision events.

    Callers latch the same commands for control_divisor consecutive ticks to
    realize the control-rate contract.
    """
    events: list[CollisionEvent] = []
    for char, cmd in zip(world.players, commands):
        _integrate_character(char, cmd if cmd is not None else HOLD, cfg.dt_sim)

    if world.ball is not None:
        ball = world.ball
        prev_ball_pos, prev_ball_vel = ball.pos, ball.vel
        dt = cfg.dt_sim

        # race feet against the ground within the tick: a steep delivery can
        # reach both in the same step, and the earlier contact must win
        entry = _earliest_foot_entry(world, prev_ball_pos, prev_ball_vel, cfg)
        foot_first = False
        if entry is not None:
            resting = (ball.pos.z - ball.radius) < 1e-6 and abs(ball.vel.z) < REST_SPEED
            new_z = ball.pos.z + ball.vel.z * dt - 0.5 * cfg.gravity * dt * dt
            if resting or new_z >= ball.radius:
                foot_first = True
            else:
                disc = ball.vel.z ** 2 + 2.0 * cfg.gravity * (ball.pos.z - ball.radius)
                t_ground = (ball.vel.z + math.sqrt(max(disc, 0.0))) / cfg.gravity
                foot_first = entry[0] * dt <= t_ground
        if foot_first:
            _resolve_foot_entry(world, entry, prev_ball_pos, prev_ball_vel, cfg, events)
        else:
            _integrate_ball(world.ball, cfg, events, world.tick)
        for i, char in enumerate(world.players):
            _body_contacts(world, i, char, prev_ball_pos, cfg, events, skip_feet=foot_first)

        b = world.ball
        if not (math.isfinite(b.pos.x) and math.isfinite(b.pos.y) and math.isfinite(b.pos.z)
                and math.isfinite(b.vel.x) and math.isfinite(b.vel.y) and math.isfinite(b.vel.z)):
            raise SimulationError("non-finite ball state after integration")
    for i, char in enumerate(world.players):
        if not (math.isfinite(char.root_pos.x) and math.isfinite(char.root_pos.y)
                and math.isfinite(char.root_vel.x) and math.isfinite(char.root_vel.y)):
            raise SimulationError(f"non-finite state for player {i} after integration")

    world.tick += 1
    world.events = events
    return events


def control_step(
    world: World, cfg: SimConfig, commands: Sequence[GaitParams | None]
) -> list[CollisionEvent]:
    """Run one control tick: commands latched for control_divisor sim ticks."""
    events: list[CollisionEvent] = []
    for _ in range(cfg.control_divisor):
        events.extend(step(world, cfg, commands))
    world.events = events
    return events
