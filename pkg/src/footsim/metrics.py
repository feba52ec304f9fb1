"""Evaluation metrics and the experiment protocols that produce them.

Metrics are pure functions over recorded trajectories; protocols execute goal
schedules (scalable by a desk-scale factor) and emit reports plus the raw
trajectory.  Goal-achievement checks scan every tick in a goal segment.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable

import numpy as np

from .core import PlanarVec, SpatialVec, horizontal_distance, rest_pose, BallState
from .episodes import (
    DribbleGoal,
    EpisodeContext,
    KickGoal,
    MoveGoal,
    TrapGoal,
    init_lob_pass,
    sample_goal,
    update_context,
    check_termination,
)
from .motion import LatentCodec, RefBuffer, build_ref_buffer
from .sim import SimConfig, World, control_step
from .trajectory import Frame, PlayerFrame, Trajectory

CONTROL_HZ = 30.0

# direction-of-better per metric, for report tables
METRIC_ARROWS = {
    "CBD": "down", "FBD": "down", "DGAR": "up", "CS": "none", "TSR": "up",
    "HRTS": "down", "RBSPT": "down", "MGAR": "up", "GMLS": "up", "KSR": "up",
    "KDD": "down", "KSD": "down", "DGAR30": "up", "TADG": "down", "TTK": "down",
}

METRIC_UNITS = {
    "CBD": "m", "FBD": "m", "DGAR": "%", "CS": "m/s", "TSR": "%", "HRTS": "%",
    "RBSPT": "m/s", "MGAR": "%", "GMLS": "", "KSR": "%", "KDD": "deg",
    "KSD": "m/s", "DGAR30": "%", "TADG": "s", "TTK": "s",
}


@dataclass(slots=True)
class MetricReport:
    name: str
    value: float
    unit: str
    sample_count: int
    protocol_id: str
    seed: int
    config_hash: str
    defined: bool = True

    def row(self) -> str:
        arrow = {"down": "v", "up": "^", "none": "-"}[METRIC_ARROWS.get(self.name, "none")]
        val = f"{self.value:.4g}" if self.defined else "undefined"
        return f"{self.name:8s}{arrow} {val:>12s} {self.unit:5s} n={self.sample_count}"


@dataclass
class ProtocolContext:
    """Everything a metric needs beyond raw frames."""

    protocol_id: str = ""
    seed: int = 0
    config_hash: str = "none"
    goal_resets: list[int] = field(default_factory=list)  # ticks of goal assignment
    measure_from_reset: int = 0  # index of first measured reset
    segment_ticks: int = 150  # goal interval in control ticks
    transition_tick: int | None = None
    dgar_tolerance: float = 0.10
    mgar_speed_tolerance: float = 0.10
    mgar_angle_tolerance_deg: float = 20.0
    ref_buffer: RefBuffer | None = None
    player: int = 0


def _require(traj: Trajectory, what: str, ok: bool):
    if not ok:
        raise ValueError(f"trajectory is missing required channel: {what}")


def _frames(traj: Trajectory) -> list[Frame]:
    return traj.frames


def _goal_vec(frame: Frame, player: int) -> PlanarVec:
    g = frame.players[player].goal
    v = g.get("velocity")
    return PlanarVec(v[0], v[1])


def _segments(traj: Trajectory, ctx: ProtocolContext):
    """Measured goal segments as (start_idx, end_idx) frame index pairs."""
    resets = ctx.goal_resets
    tick_of = {f.tick: i for i, f in enumerate(traj.frames)}
    out = []
    for ri in range(ctx.measure_from_reset, len(resets)):
        start = resets[ri]
        end = resets[ri + 1] if ri + 1 < len(resets) else traj.frames[-1].tick + 1
        si = tick_of.get(start)
        if si is None:
            continue
        ei = len(traj.frames)
        for j in range(si, len(traj.frames)):
            if traj.frames[j].tick >= end:
                ei = j
                break
        out.append((si, ei))
    return out


# ---------------------------------------------------------------------------
# metric implementations
# ---------------------------------------------------------------------------

def cbd(traj: Trajectory, ctx: ProtocolContext) -> MetricReport:
    """Mean horizontal root-ball distance over all measured frames."""
    _require(traj, "ball", all(f.ball is not None for f in traj.frames))
    total, n = 0.0, 0
    for si, ei in _segments(traj, ctx) or [(0, len(traj.frames))]:
        for f in traj.frames[si:ei]:
            p = f.players[ctx.player]
            total += math.hypot(f.ball.pos.x - p.root_pos.x, f.ball.pos.y - p.root_pos.y)
            n += 1
    return _report("CBD", total / n if n else math.nan, n, ctx)


def fbd(traj: Trajectory, ctx: ProtocolContext) -> MetricReport:
    """Mean horizontal foot-ball distance at foot ground-contact onsets.

    Onsets compare against the globally preceding frame; segment boundaries
    only select which frames are measured.
    """
    _require(traj, "ball", all(f.ball is not None for f in traj.frames))
    total, n = 0.0, 0
    for si, ei in _segments(traj, ctx) or [(0, len(traj.frames))]:
        for i in range(si, ei):
            if i == 0:
                continue
            p = traj.frames[i].players[ctx.player]
            prev = traj.frames[i - 1].players[ctx.player]
            for foot in range(2):
                if p.foot_contact[foot] and not prev.foot_contact[foot]:
                    fp = p.foot_pos[foot]
                    ball = traj.frames[i].ball
                    total += math.hypot(ball.pos.x - fp.x, ball.pos.y - fp.y)
                    n += 1
    return _report("FBD", total / n if n else math.nan, n, ctx, defined=n > 0)


def dgar(traj: Trajectory, ctx: ProtocolContext) -> MetricReport:
    """Share of goals where ball velocity enters the tolerance band."""
    achieved, n = 0, 0
    for si, ei in _segments(traj, ctx):
        goal = _goal_vec(traj.frames[si], ctx.player)
        tol = ctx.dgar_tolerance * goal.norm()
        n += 1
        for f in traj.frames[si:ei]:
            dv = math.hypot(f.ball.vel.x - goal.x, f.ball.vel.y - goal.y)
            if dv <= tol:
                achieved += 1
                break
    return _report("DGAR", 100.0 * achieved / n if n else math.nan, n, ctx)


def cs(traj: Trajectory, ctx: ProtocolContext) -> MetricReport:
    """Mean horizontal root speed."""
    total, n = 0.0, 0
    for si, ei in _segments(traj, ctx) or [(0, len(traj.frames))]:
        for f in traj.frames[si:ei]:
            p = f.players[ctx.player]
            total += math.hypot(p.root_vel.x, p.root_vel.y)
            n += 1
    return _report("CS", total / n if n else math.nan, n, ctx)


def _first_contact_tick(traj: Trajectory, player: int) -> int | None:
    for f in traj.frames:
        for e in f.events:
            if e.player == player:
                return f.tick
    return None


def _grounded_tick(traj: Trajectory) -> int | None:
    for f in traj.frames:
        for e in f.events:
            if e.player == -1 and e.part == "ground":
                return f.tick
    return None


def tsr_hrts_rbspt(trajs: list[Trajectory], ctx: ProtocolContext) -> list[MetricReport]:
    """Trap protocol bundle over per-episode trajectories."""
    successes = 0
    handball_successes = 0
    rbspt_total, rbspt_n = 0.0, 0
    for traj in trajs:
        contact = _first_contact_tick(traj, ctx.player)
        grounded = _grounded_tick(traj)
        success = contact is not None and (grounded is None or contact <= grounded)
        if not success:
            continue
        successes += 1
        touched_hand = any(
            e.player == ctx.player and e.part.startswith("handball")
            for f in traj.frames for e in f.events
        )
        handball_successes += touched_hand
        # mean relative speed over the 5 frames after first contact
        idx = next(i for i, f in enumerate(traj.frames) if f.tick >= contact)
        post = traj.frames[idx + 1 : idx + 6]
        if post:
            s = 0.0
            for f in post:
                p = f.players[ctx.player]
                s += f.ball.vel.sub(p.root_vel).norm()
            rbspt_total += s / len(post)
            rbspt_n += 1
    n = len(trajs)
    return [
        _report("TSR", 100.0 * successes / n if n else math.nan, n, ctx),
        _report("HRTS", 100.0 * handball_successes / successes if successes else math.nan,
                successes, ctx, defined=successes > 0),
        _report("RBSPT", rbspt_total / rbspt_n if rbspt_n else math.nan, rbspt_n, ctx,
                defined=rbspt_n > 0),
    ]


def mgar(traj: Trajectory, ctx: ProtocolContext) -> MetricReport:
    """Share of goals with simultaneous velocity-band and facing-cone hits."""
    achieved, n = 0, 0
    cos_tol = math.cos(math.radians(ctx.mgar_angle_tolerance_deg))
    for si, ei in _segments(traj, ctx):
        g = traj.frames[si].players[ctx.player].goal
        goal_v = PlanarVec(*g["velocity"])
        goal_f = PlanarVec(*g["facing"])
        tol = ctx.mgar_speed_tolerance * goal_v.norm()
        n += 1
        for f in traj.frames[si:ei]:
            p = f.players[ctx.player]
            dv = math.hypot(p.root_vel.x - goal_v.x, p.root_vel.y - goal_v.y)
            if dv <= tol and (p.facing.x * goal_f.x + p.facing.y * goal_f.y) >= cos_tol:
                achieved += 1
                break
    return _report("MGAR", 100.0 * achieved / n if n else math.nan, n, ctx)


def gmls(traj: Trajectory, ctx: ProtocolContext) -> MetricReport:
    """Mean cosine similarity between the policy latent and the latent of the
    nearest reference goal (distance: |dv| + facing angle in radians)."""
    if ctx.ref_buffer is None:
        raise ValueError("trajectory is missing required channel: reference buffer for GMLS")
    _require(traj, "latent", all(len(f.players[ctx.player].latent) > 0 for f in traj.frames))
    total, n = 0.0, 0
    for si, ei in _segments(traj, ctx) or [(0, len(traj.frames))]:
        for f in traj.frames[si:ei]:
            p = f.players[ctx.player]
            g = p.goal
            pair = ctx.ref_buffer.nearest(PlanarVec(*g["velocity"]), PlanarVec(*g["facing"]))
            z = np.asarray(p.latent)
            total += float(np.dot(pair.ref_latent, z))
            n += 1
    return _report("GMLS", total / n if n else math.nan, n, ctx)


def kick_bundle(trajs: list[Trajectory], goals: list[KickGoal], ctx: ProtocolContext) -> list[MetricReport]:
    """KSR/KDD/KSD over per-kick trajectories (window: 1/6 s after contact)."""
    succ = 0
    kdd_total, ksd_total, wn = 0.0, 0.0, 0
    for traj, goal in zip(trajs, goals):
        contact = _first_contact_tick(traj, ctx.player)
        if contact is None:
            continue
        succ += 1
        idx = next(i for i, f in enumerate(traj.frames) if f.tick >= contact)
        window = traj.frames[idx : idx + 5]
        gv = goal.velocity
        gn = gv.norm()
        acc_d, acc_s, m = 0.0, 0.0, 0
        for f in window:
            bv = f.ball.vel
            bn = bv.norm()
            if bn < 1e-9 or gn < 1e-9:
                continue
            c = max(-1.0, min(1.0, bv.dot(gv) / (bn * gn)))
            acc_d += math.degrees(math.acos(c))
            acc_s += abs(bn - gn)
            m += 1
        if m:
            kdd_total += acc_d / m
            ksd_total += acc_s / m
            wn += 1
    n = len(trajs)
    return [
        _report("KSR", 100.0 * succ / n if n else math.nan, n, ctx),
        _report("KDD", kdd_total / wn if wn else math.nan, wn, ctx, defined=wn > 0),
        _report("KSD", ksd_total / wn if wn else math.nan, wn, ctx, defined=wn > 0),
    ]


def dgar30_tadg(trajs: list[Trajectory], goals: list[DribbleGoal], ctx: ProtocolContext) -> list[MetricReport]:
    """Transition bundle: goal achievement within 30 s of the switch, and the
    time to achieve for the achieved cases."""
    achieved = 0
    tadg_total = 0.0
    for traj, goal in zip(trajs, goals):
        t0 = ctx.transition_tick if ctx.transition_tick is not None else traj.frames[0].tick
        tol = ctx.dgar_tolerance * goal.velocity.norm()
        for f in traj.frames:
            if f.tick < t0:
                continue
            dv = math.hypot(f.ball.vel.x - goal.velocity.x, f.ball.vel.y - goal.velocity.y)
            if dv <= tol:
                achieved += 1
                tadg_total += (f.tick - t0) / CONTROL_HZ
                break
    n = len(trajs)
    return [
        _report("DGAR30", 100.0 * achieved / n if n else math.nan, n, ctx),
        _report("TADG", tadg_total / achieved if achieved else math.nan, achieved, ctx,
                defined=achieved > 0),
    ]


def ttk(trajs: list[Trajectory], ctx: ProtocolContext) -> MetricReport:
    """Mean time from the transition until the ball meets a foot."""
    total, n = 0.0, 0
    for traj in trajs:
        t0 = ctx.transition_tick if ctx.transition_tick is not None else traj.frames[0].tick
        for f in traj.frames:
            if f.tick < t0:
                continue
            if any(e.player == ctx.player and e.part.startswith("foot") for e in f.events):
                total += (f.tick - t0) / CONTROL_HZ
                n += 1
                break
    return _report("TTK", total / n if n else math.nan, n, ctx, defined=n > 0)


def _report(name, value, count, ctx: ProtocolContext, defined=True) -> MetricReport:
    return MetricReport(name, value, METRIC_UNITS[name], count, ctx.protocol_id,
                        ctx.seed, ctx.config_hash, defined)


SINGLE_TRAJECTORY_METRICS: dict[str, Callable] = {
    "CBD": cbd, "FBD": fbd, "DGAR": dgar, "CS": cs, "MGAR": mgar, "GMLS": gmls,
}


def compute(metric: str, traj: Trajectory, ctx: ProtocolContext) -> MetricReport:
    try:
        fn = SINGLE_TRAJECTORY_METRICS[metric]
    except KeyError:
        raise ValueError(f"unknown single-trajectory metric {metric!r}") from None
    return fn(traj, ctx)


# ---------------------------------------------------------------------------
# protocols
# ---------------------------------------------------------------------------

@dataclass
class Protocol:
    id: str
    goal_count: int
    interval_s: float = 5.0
    warmup_resets: int = 3  # measurements begin at the next reset
    speed_range: tuple[float, float] = (1.0, 7.0)

    def scaled(self, scale: float) -> "Protocol":
        count = max(1, int(round(self.goal_count * scale)))
        return replace(self, goal_count=count)


PROTOCOLS = {
    "dribble-standard": Protocol("dribble-standard", 1000, speed_range=(1.0, 7.0)),
    "dribble-ablation": Protocol("dribble-ablation", 1000, speed_range=(1.0, 7.0)),
    "dribble-speed": Protocol("dribble-speed", 7),
    "move-standard": Protocol("move-standard", 1000, speed_range=(1.0, 5.0)),
    "trap-lob": Protocol("trap-lob", 1000),
    "kick-standard": Protocol("kick-standard", 1000),
    "trap-to-dribble": Protocol("trap-to-dribble", 1000),
    "move-to-dribble": Protocol("move-to-dribble", 1000),
    "move-to-trap": Protocol("move-to-trap", 1000),
    "dribble-to-kick": Protocol("dribble-to-kick", 1000),
}


def _record_frame(world, skill, goal, latent, rewards, events, divisor=2):
    return Frame(
        world.tick // divisor,  # control tick index
        world.ball.copy() if world.ball is not None else None,
        [PlayerFrame.capture(world.players[0], skill, goal.to_json(), latent, rewards)],
        list(events),
    )


def run_protocol(
    protocol_id: str,
    policies: dict,
    seed: int,
    scale: float = 1.0,
    sim_cfg: SimConfig | None = None,
    codec: LatentCodec | None = None,
    ref_buffer: RefBuffer | None = None,
    cfg_hash: str = "none",
) -> tuple[list[MetricReport], Trajectory | None]:
    """Execute a named protocol and evaluate its metric bundle.

    `policies` maps skill name to a policy object with .act; the trajectory
    returned is the continuous-run protocols' record (None for per-episode
    bundles, which aggregate many short runs).
    """
    if protocol_id not in PROTOCOLS:
        raise ValueError(f"unknown protocol {protocol_id!r}")
    proto = PROTOCOLS[protocol_id].scaled(scale)
    sim_cfg = sim_cfg or SimConfig(seed=seed)
    codec = codec or LatentCodec()
    rng = np.random.default_rng(seed)
    ctx = ProtocolContext(protocol_id=proto.id, seed=seed, config_hash=cfg_hash)
    ctx.ref_buffer = ref_buffer or (build_ref_buffer(codec) if protocol_id == "move-standard" else None)

    if protocol_id in ("dribble-standard", "dribble-ablation"):
        return _dribble_protocol(proto, policies["dribble"], rng, sim_cfg, codec, ctx)
    if protocol_id == "dribble-speed":
        return _dribble_speed_protocol(proto, policies["dribble"], rng, sim_cfg, codec, ctx)
    if protocol_id == "move-standard":
        return _move_protocol(proto, policies["move"], rng, sim_cfg, codec, ctx)
    if protocol_id == "trap-lob":
        return _trap_protocol(proto, policies["trap"], rng, sim_cfg, codec, ctx)
    if protocol_id == "kick-standard":
        return _kick_protocol(proto, policies["kick"], rng, sim_cfg, codec, ctx)
    if protocol_id == "trap-to-dribble":
        return _trap_to_dribble(proto, policies, rng, sim_cfg, codec, ctx)
    if protocol_id == "move-to-dribble":
        return _move_to_dribble(proto, policies, rng, sim_cfg, codec, ctx)
    if protocol_id == "move-to-trap":
        return _move_to_trap(proto, policies, rng, sim_cfg, codec, ctx)
    if protocol_id == "dribble-to-kick":
        return _dribble_to_kick(proto, policies, rng, sim_cfg, codec, ctx)
    raise AssertionError


def _continuous_run(proto, policy, skill, rng, sim_cfg, codec, ctx, world, goal_fn):
    frames = []
    interval = int(proto.interval_s * CONTROL_HZ)
    ctx.segment_ticks = interval
    ctx.measure_from_reset = proto.warmup_resets
    total_resets = proto.goal_count + proto.warmup_resets + 1
    goal = None
    for ri in range(total_resets):
        goal = goal_fn(rng, ri)
        for k in range(interval):
            char = world.players[0]
            latent = policy.act(char, world.ball, goal)
            events = control_step(world, sim_cfg, [codec.decode(latent)])
            frames.append(_record_frame(world, skill, goal, latent, {}, events, sim_cfg.control_divisor))
            if k == 0:
                # reset tick uses the first frame carrying the new goal, the
                # same convention replay reconstruction uses
                ctx.goal_resets.append(frames[-1].tick)
            if world.ball is not None:
                # keep the continuous run alive: respawn a lost ball nearby
                if horizontal_distance(world.ball.pos, char.root_pos) > 12.0:
                    ang = rng.uniform(0.0, 2.0 * math.pi)
                    world.ball.pos = SpatialVec(
                        char.root_pos.x + math.cos(ang), char.root_pos.y + math.sin(ang), 0.11
                    )
                    world.ball.vel = SpatialVec(0.0, 0.0, 0.0)
                    world.ball.ang_vel = SpatialVec(0.0, 0.0, 0.0)
    return Trajectory({"protocol": proto.id, "seed": ctx.seed}, frames)


def _dribble_protocol(proto, policy, rng, sim_cfg, codec, ctx):
    char = rest_pose()
    ang = rng.uniform(0.0, 2.0 * math.pi)
    ball = BallState(SpatialVec(math.cos(ang), math.sin(ang), 0.11), SpatialVec(0, 0, 0))
    world = World(ball, [char])

    def goal_fn(r, _ri):
        speed = r.uniform(*proto.speed_range)
        th = r.uniform(0.0, 2.0 * math.pi)
        return DribbleGoal(PlanarVec(speed * math.cos(th), speed * math.sin(th)))

    traj = _continuous_run(proto, policy, "dribble", rng, sim_cfg, codec, ctx, world, goal_fn)
    reports = [cbd(traj, ctx), fbd(traj, ctx), dgar(traj, ctx)]
    return reports, traj


def _dribble_speed_protocol(proto, policy, rng, sim_cfg, codec, ctx):
    """Fixed forward target speeds, measured after a 10 s warmup for 30 s."""
    reports = []
    frames_all = []
    for speed in range(1, proto.goal_count + 1):
        char = rest_pose()
        ball = BallState(SpatialVec(1.0, 0.0, 0.11), SpatialVec(0, 0, 0))
        world = World(ball, [char])
        goal = DribbleGoal(PlanarVec(float(speed), 0.0))
        sub = ProtocolContext(
            protocol_id=f"{ctx.protocol_id}-{speed}", seed=ctx.seed,
            config_hash=ctx.config_hash,
        )
        frames = []
        for t in range(int(40.0 * CONTROL_HZ)):
            latent = policy.act(world.players[0], world.ball, goal)
            events = control_step(world, sim_cfg, [codec.decode(latent)])
            if t >= int(10.0 * CONTROL_HZ):
                frames.append(_record_frame(world, "dribble", goal, latent, {}, events, sim_cfg.control_divisor))
        traj = Trajectory({"protocol": sub.protocol_id}, frames)
        reports.extend([cs(traj, sub), cbd(traj, sub), fbd(traj, sub)])
        frames_all.extend(frames)
    return reports, None


def _move_protocol(proto, policy, rng, sim_cfg, codec, ctx):
    world = World(None, [rest_pose()])

    def goal_fn(r, _ri):
        tf = r.uniform(0.0, 2.0 * math.pi)
        tv = r.uniform(0.0, 2.0 * math.pi)
        face = PlanarVec(math.cos(tf), math.sin(tf))
        vdir = PlanarVec(math.cos(tv), math.sin(tv))
        hi = proto.speed_range[1]
        if face.dot(vdir) < 0.0:  # more than 90 degrees apart
            hi = 2.5
        speed = r.uniform(proto.speed_range[0], hi)
        return MoveGoal(vdir.scaled(speed), face)

    traj = _continuous_run(proto, policy, "move", rng, sim_cfg, codec, ctx, world, goal_fn)
    reports = [mgar(traj, ctx), gmls(traj, ctx)]
    return reports, traj


def _trap_protocol(proto, policy, rng, sim_cfg, codec, ctx):
    from .episodes import run_episode, EpisodeContext as EC

    trajs = []
    for _ in range(proto.goal_count):
        char = rest_pose()
        ball, _spec = init_lob_pass(char, rng, sim_cfg.gravity)
        world = World(ball, [char])
        goal = sample_goal("trap", rng, pass_kind="lob")
        ectx = EC("trap", pass_kind="lob")
        res = run_episode("trap", world, goal, ectx, policy.act, codec, sim_cfg, rng,
                          record_frames=True)
        trajs.append(Trajectory({}, res.frames))
    return tsr_hrts_rbspt(trajs, ctx), None


def _kick_protocol(proto, policy, rng, sim_cfg, codec, ctx):
    from .episodes import run_episode, EpisodeContext as EC

    trajs, goals = [], []
    for _ in range(proto.goal_count):
        char = rest_pose()
        fx, fy = char.facing
        ball = BallState(SpatialVec(char.root_pos.x + fx, char.root_pos.y + fy, 0.11),
                         SpatialVec(0, 0, 0))
        world = World(ball, [char])
        goal = sample_goal("kick", rng, facing=char.facing)
        ectx = EC("kick")
        res = run_episode("kick", world, goal, ectx, policy.act, codec, sim_cfg, rng,
                          record_frames=True)
        trajs.append(Trajectory({}, res.frames))
        goals.append(goal)
    return kick_bundle(trajs, goals, ctx), None


def _run_pre_transition_trap(policies, rng, sim_cfg, codec):
    """Shared pre-transition segment: analytic trap until first ball contact."""
    char = rest_pose()
    ball, _ = init_lob_pass(char, rng, sim_cfg.gravity)
    world = World(ball, [char])
    ectx = EpisodeContext("trap", pass_kind="lob")
    goal = TrapGoal("foot_R")
    clock = 0
    while clock < 300:
        latent = policies["trap"].act(world.players[0], world.ball, goal)
        events = control_step(world, sim_cfg, [codec.decode(latent)])
        clock += 1
        update_context(ectx, clock, events)
        if ectx.first_contact is not None:
            return world
        if ectx.grounded_before_contact or ectx.handball:
            return None
    return None


def _measure_dribble_after(world, policy, goal, sim_cfg, codec, horizon_ticks=900):
    frames = []
    t0 = world.tick
    for _ in range(horizon_ticks):
        latent = policy.act(world.players[0], world.ball, goal)
        events = control_step(world, sim_cfg, [codec.decode(latent)])
        frames.append(_record_frame(world, "dribble", goal, latent, {}, events, sim_cfg.control_divisor))
        gv = goal.velocity
        bv = world.ball.vel
        if math.hypot(bv.x - gv.x, bv.y - gv.y) <= 0.10 * gv.norm():
            break
    return Trajectory({}, frames), t0


def _trap_to_dribble(proto, policies, rng, sim_cfg, codec, ctx):
    trajs, goals = [], []
    for _ in range(proto.goal_count):
        world = _run_pre_transition_trap(policies, rng, sim_cfg, codec)
        speed = rng.uniform(1.0, 7.0)
        th = rng.uniform(0.0, 2.0 * math.pi)
        if world is None:
            continue
        goal = DribbleGoal(PlanarVec(speed * math.cos(th), speed * math.sin(th)))
        traj, _ = _measure_dribble_after(world, policies["dribble"], goal, sim_cfg, codec)
        trajs.append(traj)
        goals.append(goal)
    return dgar30_tadg(trajs, goals, replace(ctx, transition_tick=None)), None


def _move_to_dribble(proto, policies, rng, sim_cfg, codec, ctx):
    trajs, goals = [], []
    for _ in range(proto.goal_count):
        char = rest_pose()
        ang = rng.uniform(0.0, 2.0 * math.pi)
        rad = rng.uniform(2.5, 3.5)
        speed0 = rng.uniform(0.0, 1.0)
        va = rng.uniform(0.0, 2.0 * math.pi)
        ball = BallState(
            SpatialVec(rad * math.cos(ang), rad * math.sin(ang), 0.11),
            SpatialVec(speed0 * math.cos(va), speed0 * math.sin(va), 0.0),
        )
        world = World(ball, [char])
        target_speed = rng.uniform(1.0, 7.0)
        clock = 0
        while clock < 300:
            char = world.players[0]
            to_ball = PlanarVec(ball.pos.x - char.root_pos.x, ball.pos.y - char.root_pos.y)
            d = to_ball.norm()
            if d <= 2.0:
                break
            dir_ = to_ball.scaled(1.0 / d)
            goal = MoveGoal(dir_.scaled(target_speed), dir_)
            latent = policies["move"].act(char, None, goal)
            control_step(world, sim_cfg, [codec.decode(latent)])
            clock += 1
        speed = rng.uniform(1.0, 7.0)
        th = rng.uniform(0.0, 2.0 * math.pi)
        goal = DribbleGoal(PlanarVec(speed * math.cos(th), speed * math.sin(th)))
        traj, _ = _measure_dribble_after(world, policies["dribble"], goal, sim_cfg, codec)
        trajs.append(traj)
        goals.append(goal)
    return dgar30_tadg(trajs, goals, replace(ctx, transition_tick=None)), None


def _move_to_trap(proto, policies, rng, sim_cfg, codec, ctx):
    from .episodes import run_episode, EpisodeContext as EC

    trajs = []
    for _ in range(proto.goal_count):
        char = rest_pose()
        world = World(None, [char])
        run_ticks = int(rng.uniform(1.0, 2.0) * CONTROL_HZ)
        target_speed = rng.uniform(1.0, 7.0)
        th = rng.uniform(0.0, 2.0 * math.pi)
        goal_dir = PlanarVec(math.cos(th), math.sin(th))
        for _t in range(run_ticks):
            mgoal = MoveGoal(goal_dir.scaled(target_speed), goal_dir)
            latent = policies["move"].act(world.players[0], None, mgoal)
            control_step(world, sim_cfg, [codec.decode(latent)])
        ball, _ = init_lob_pass(world.players[0], rng, sim_cfg.gravity)
        world.ball = ball
        tgoal = sample_goal("trap", rng, pass_kind="lob")
        ectx = EC("trap", pass_kind="lob")
        res = run_episode("trap", world, tgoal, ectx, policies["trap"].act, codec,
                          sim_cfg, rng, record_frames=True)
        trajs.append(Trajectory({}, res.frames))
    return tsr_hrts_rbspt(trajs, ctx), None


def _dribble_to_kick(proto, policies, rng, sim_cfg, codec, ctx):
    from .episodes import run_episode, EpisodeContext as EC

    trajs, goals = [], []
    for _ in range(proto.goal_count):
        char = rest_pose()
        fx, fy = char.facing
        ball = BallState(
            SpatialVec(char.root_pos.x + 1.5 * fx, char.root_pos.y + 1.5 * fy, 0.11),
            SpatialVec(0, 0, 0),
        )
        world = World(ball, [char])
        speed = rng.uniform(1.0, 7.0)
        dgoal = DribbleGoal(PlanarVec(speed * fx, speed * fy))
        pre_ticks = int(rng.uniform(3.0, 5.0) * CONTROL_HZ)
        for _t in range(pre_ticks):
            latent = policies["dribble"].act(world.players[0], world.ball, dgoal)
            control_step(world, sim_cfg, [codec.decode(latent)])
        h = rng.uniform(math.radians(-45.0), math.radians(45.0))
        v = rng.uniform(0.0, math.radians(45.0))
        kspeed = rng.uniform(7.0, 30.0)
        cfx, cfy = world.players[0].facing
        base = math.atan2(cfy, cfx) + h
        kgoal = KickGoal(SpatialVec(
            kspeed * math.cos(v) * math.cos(base),
            kspeed * math.cos(v) * math.sin(base),
            kspeed * math.sin(v),
        ))
        ectx = EC("kick")
        res = run_episode("kick", world, kgoal, ectx, policies["kick"].act, codec,
                          sim_cfg, rng, record_frames=True)
        trajs.append(Trajectory({}, res.frames))
        goals.append(kgoal)
    reports = kick_bundle(trajs, goals, ctx)
    reports.append(ttk(trajs, replace(ctx, transition_tick=None)))
    return reports, None


# ---------------------------------------------------------------------------
# report output
# ---------------------------------------------------------------------------

def reports_to_csv(reports: list[MetricReport]) -> str:
    lines = ["metric,value,unit,sample_count,protocol,seed,config_hash,defined"]
    for r in reports:
        val = repr(r.value) if r.defined else ""
        lines.append(
            f"{r.name},{val},{r.unit},{r.sample_count},{r.protocol_id},{r.seed},"
            f"{r.config_hash},{int(r.defined)}"
        )
    return "\n".join(lines) + "\n"


def reports_to_table(reports: list[MetricReport]) -> str:
    out = [f"{'metric':9s}{'value':>13s} {'unit':5s} samples"]
    out.extend(r.row() for r in reports)
    return "\n".join(out) + "\n"
