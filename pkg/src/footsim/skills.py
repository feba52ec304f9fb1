"""Skill controllers (analytic baselines and a trainable parametric policy)
plus the desk-scale cross-entropy trainer and snapshot-buffer construction.

Every controller consumes character/ball/goal features expressed in the
character frame and emits a unit latent for the gait decoder.  Training order
is enforced: move, then trap (move buffer), then dribble (move+trap), then
kick (dribble).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from .core import (
    BODY_PARTS,
    BODY_POINT_OFFSETS,
    BallState,
    CharacterState,
    PlanarVec,
    SpatialVec,
    approaching,
    horizontal_distance,
)
from .episodes import (
    BUFFER_PREREQS,
    DribbleGoal,
    EpisodeContext,
    KickGoal,
    MoveGoal,
    Snapshot,
    StiBuffer,
    TrapGoal,
    init_episode,
    run_episode,
    sample_goal,
)
from .motion import GaitParams, KickSwing, LatentCodec, RefBuffer, STRIKE_SPEED_MAX
from .rewards import RewardConfig, DEFAULT_REWARDS
from .sim import SimConfig

BALL_SKILLS = ("trap", "dribble", "kick")


def _to_char_frame(char: CharacterState, wx: float, wy: float) -> tuple[float, float]:
    fx, fy = char.facing
    return wx * fx + wy * fy, -wx * fy + wy * fx


def _from_char_angle(char: CharacterState, cx: float, cy: float) -> tuple[float, float]:
    fx, fy = char.facing
    return cx * fx - cy * fy, cx * fy + cy * fx


def predict_landing(ball: BallState, g: float = 9.8, height: float = 0.11) -> tuple[PlanarVec, float]:
    """Drag-free landing point and time-to-land at the given height.

    Rolling balls (no vertical motion above the height) predict along their
    current path one second ahead.
    """
    dz = ball.pos.z - height
    vz = ball.vel.z
    disc = vz * vz + 2.0 * g * dz
    if disc < 0.0 or (abs(dz) < 1e-6 and abs(vz) < 1e-3):
        t = 1.0
    else:
        t = (vz + math.sqrt(disc)) / g
        if t < 0.0:
            t = 0.0
    return PlanarVec(ball.pos.x + ball.vel.x * t, ball.pos.y + ball.vel.y * t), t


def predict_landing_sim(
    ball: BallState, cfg: SimConfig, height: float = 0.11, max_time: float = 6.0
) -> tuple[PlanarVec, float, bool]:
    """Descending-crossing prediction that replays the flight integrator,
    damping included.

    Returns (point, time, reached); reached is False when the ball never
    descends through the height within the horizon (e.g. a flat lob below a
    torso-height target).
    """
    dt = cfg.dt_sim
    g = cfg.gravity
    damp = math.exp(-cfg.ball_linear_damping * dt)
    px, py, pz = ball.pos
    vx, vy, vz = ball.vel
    if pz - height < 1e-6 and abs(vz) < 1e-3:
        return PlanarVec(px + vx, py + vy), 1.0, True
    t = 0.0
    steps = int(max_time / dt)
    for _ in range(steps):
        nz = pz + vz * dt - 0.5 * g * dt * dt
        if nz <= height and vz <= 0.0:
            disc = vz * vz + 2.0 * g * (pz - height)
            t_hit = (vz + math.sqrt(max(disc, 0.0))) / g
            t_hit = min(max(t_hit, 0.0), dt)
            return PlanarVec(px + vx * t_hit, py + vy * t_hit), t + t_hit, True
        if nz <= ball.radius:  # grounds without ever crossing the height
            return PlanarVec(px + vx * dt, py + vy * dt), t + dt, False
        px += vx * dt
        py += vy * dt
        pz = nz
        vx *= damp
        vy *= damp
        vz = (vz - g * dt) * damp
        t += dt
    return PlanarVec(px, py), t, False


# ---------------------------------------------------------------------------
# analytic controllers
# ---------------------------------------------------------------------------

@dataclass
class AnalyticPolicy:
    skill: str
    codec: LatentCodec
    sim_cfg: SimConfig = field(default_factory=SimConfig)
    arrival_margin: float = 0.3  # s shaved off intercept time to settle early

    @property
    def kind(self) -> str:
        return "analytic"

    def act(self, char: CharacterState, ball: BallState | None, goal) -> np.ndarray:
        if self.skill in BALL_SKILLS and ball is None:
            raise ValueError(f"{self.skill} policy requires a ball state")
        if self.skill == "move":
            return self._move(char, goal)
        if self.skill == "dribble":
            return self._dribble(char, ball, goal)
        if self.skill == "trap":
            return self._trap(char, ball, goal)
        if self.skill == "kick":
            return self._kick(char, ball, goal)
        raise ValueError(f"unknown skill {self.skill!r}")

    def _command(self, char, vel_world: PlanarVec, face_world: PlanarVec, kick=None):
        vx, vy = _to_char_frame(char, vel_world.x, vel_world.y)
        fx, fy = _to_char_frame(char, face_world.x, face_world.y)
        if kick is not None:
            kx, ky = _to_char_frame(char, kick.direction.x, kick.direction.y)
            kick = KickSwing(SpatialVec(kx, ky, kick.direction.z), kick.speed, kick.foot)
        return self.codec.encode_command(PlanarVec(vx, vy), PlanarVec(fx, fy), kick)

    def _move(self, char, goal: MoveGoal) -> np.ndarray:
        ex = goal.velocity.x - char.root_vel.x
        ey = goal.velocity.y - char.root_vel.y
        cmd = PlanarVec(goal.velocity.x + 0.5 * ex, goal.velocity.y + 0.5 * ey)
        speed = cmd.norm()
        if speed > 7.0:
            cmd = cmd.scaled(7.0 / speed)
        return self._command(char, cmd, goal.facing)

    def _dribble(self, char, ball, goal: DribbleGoal) -> np.ndarray:
        target_speed = goal.velocity.norm()
        if target_speed > 0.05:
            tdir = goal.velocity.scaled(1.0 / target_speed)
        else:
            tdir = char.facing
        # pursue a point behind the ball along the target direction, offset so
        # the right foot lines up with the target line; close at the ball's
        # own velocity plus a braking-limited term so arrival is gentle
        bh0 = ball.vel.horizontal()
        px = ball.pos.x - 0.32 * tdir.x + 0.12 * tdir.y
        py = ball.pos.y - 0.32 * tdir.y - 0.12 * tdir.x
        dx, dy = px - char.root_pos.x, py - char.root_pos.y
        dist = math.hypot(dx, dy)
        if dist > 1.5:  # far: flat-out recovery sprint
            vel = PlanarVec(dx / dist * 7.0, dy / dist * 7.0)
        elif dist > 1e-6:  # near: close at ball speed plus a braking-limited term
            closing = min(math.sqrt(2.0 * 8.0 * dist), 4.5)
            vel = PlanarVec(bh0.x + dx / dist * closing, bh0.y + dy / dist * closing)
            vn = vel.norm()
            if vn > 7.0:
                vel = vel.scaled(7.0 / vn)
        else:
            vel = goal.velocity
        face = tdir

        kick = None
        bh = ball.vel.horizontal()
        along = bh.x * tdir.x + bh.y * tdir.y  # ball progress toward the goal
        needs_push = along < target_speed - 0.05 or bh.norm() > target_speed + 0.6
        if needs_push and ball.pos.z < 0.35 and dist < 1.2:
            foot_i, foot_d = self._nearest_foot(char, ball)
            if foot_d < 0.5:
                fp = char.foot_pos[foot_i]
                aim = ball.pos.sub(fp)
                an = aim.norm()
                if an > 1e-6:
                    aim = aim.scaled(1.0 / an)
                    align = aim.x * tdir.x + aim.y * tdir.y
                    # power taps while building speed, precise taps near target;
                    # misaligned taps are softened so the ball stays in reach.
                    # the 10% band needs aim within ~5.7 deg, hence cos > 0.995
                    building = along < 0.55 * target_speed
                    gate = 0.5 if building else 0.995
                    if align > gate:
                        e = self.sim_cfg.body_pair_restitution()
                        vb_n = ball.vel.dot(aim)
                        want = min(target_speed * 1.02 + 0.15, 7.4)
                        if building:
                            want *= max(0.25, align ** 3)
                        speed = (want + e * vb_n) / (1.0 + e)
                        speed = min(max(speed, 0.0), STRIKE_SPEED_MAX)
                        kick = KickSwing(aim, speed, "L" if foot_i == 0 else "R")
        return self._command(char, vel, face, kick)

    @staticmethod
    def _nearest_foot(char, ball) -> tuple[int, float]:
        d0 = ball.pos.sub(char.foot_pos[0]).norm()
        d1 = ball.pos.sub(char.foot_pos[1]).norm()
        return (0, d0) if d0 <= d1 else (1, d1)

    def _trap(self, char, ball, goal: TrapGoal) -> np.ndarray:
        to_ball = PlanarVec(ball.pos.x - char.root_pos.x, ball.pos.y - char.root_pos.y)
        face = to_ball.scaled(1.0 / to_ball.norm()) if to_ball.norm() > 1e-6 else char.facing
        if not approaching(ball, char):
            # post-contact / receding: match the ball's momentum with the root
            bh = ball.vel.horizontal()
            speed = bh.norm()
            if speed > 7.0:
                bh = bh.scaled(7.0 / speed)
            return self._command(char, bh, face)
        off = BODY_POINT_OFFSETS[goal.body_part]
        rolling = ball.pos.z - ball.radius < 0.05 and abs(ball.vel.z) < 0.5
        if rolling:
            # block the path: stand at its nearest point ahead of the ball
            off = BODY_POINT_OFFSETS["foot_L" if goal.body_part.endswith("L") else "foot_R"]
            bh = ball.vel.horizontal()
            speed = bh.norm()
            if speed > 0.3:
                ux, uy = bh.x / speed, bh.y / speed
                along = (char.root_pos.x - ball.pos.x) * ux + (char.root_pos.y - ball.pos.y) * uy
                along = max(along, 0.0)
                intercept = PlanarVec(ball.pos.x + ux * along, ball.pos.y + uy * along)
                t_land = along / speed if speed > 1e-6 else 0.5
            else:
                intercept = PlanarVec(ball.pos.x, ball.pos.y)
                t_land = 0.5
        else:
            # aim slightly above the contact floor so the touch lands before
            # the ground
            h_star = max(off.z, ball.radius + 0.07)
            intercept, t_land, reached = predict_landing_sim(ball, self.sim_cfg, h_star)
            if not reached:
                # flat delivery below the target's height: present the nearer foot
                off = BODY_POINT_OFFSETS["foot_L" if goal.body_part.endswith("L") else "foot_R"]
                intercept, t_land, _ = predict_landing_sim(ball, self.sim_cfg, ball.radius + 0.07)
        # place the root so the target body point meets the intercept
        ox, oy = _from_char_angle(char, off.x, off.y)
        gx = intercept.x - ox
        gy = intercept.y - oy
        dx, dy = gx - char.root_pos.x, gy - char.root_pos.y
        dist = math.hypot(dx, dy)
        t_go = max(t_land - self.arrival_margin, 0.15)
        # braking curve keeps the root from overshooting the intercept
        speed = min(dist / t_go, math.sqrt(2.0 * 9.6 * dist), 7.0)
        vel = PlanarVec(dx / dist * speed, dy / dist * speed) if dist > 1e-6 else PlanarVec(0, 0)
        return self._command(char, vel, face)

    def _kick(self, char, ball, goal: KickGoal) -> np.ndarray:
        target_speed = goal.velocity.norm()
        hmag = math.hypot(goal.velocity.x, goal.velocity.y)
        hdir = PlanarVec(goal.velocity.x / hmag, goal.velocity.y / hmag) if hmag > 1e-9 \
            else char.facing
        foot_i, foot_d = self._nearest_foot(char, ball)
        if foot_d < 0.45 and ball.pos.z < 0.5:
            fp = char.foot_pos[foot_i]
            aim = ball.pos.sub(fp)
            an = aim.norm()
            aim = aim.scaled(1.0 / an) if an > 1e-6 else SpatialVec(hdir.x, hdir.y, 0.0)
            e = self.sim_cfg.body_pair_restitution()
            vb_n = ball.vel.dot(aim)
            speed = (target_speed + e * vb_n) / (1.0 + e)
            speed = min(max(speed, 0.0), STRIKE_SPEED_MAX)
            kick = KickSwing(aim, speed, "L" if foot_i == 0 else "R")
            return self._command(char, PlanarVec(0.0, 0.0), hdir, kick)
        # stand behind the ball on the target line; braking-limited approach
        bh = ball.vel.horizontal()
        ax = ball.pos.x - 0.35 * hdir.x
        ay = ball.pos.y - 0.35 * hdir.y
        dx, dy = ax - char.root_pos.x, ay - char.root_pos.y
        dist = math.hypot(dx, dy)
        closing = min(0.4 + math.sqrt(2.0 * 9.6 * dist), 7.0)
        if dist > 1e-6:
            vel = PlanarVec(bh.x + dx / dist * closing, bh.y + dy / dist * closing)
            vn = vel.norm()
            if vn > 7.0:
                vel = vel.scaled(7.0 / vn)
        else:
            vel = PlanarVec(0.0, 0.0)
        return self._command(char, vel, hdir)


# ---------------------------------------------------------------------------
# parametric policy
# ---------------------------------------------------------------------------

def feature_size(skill: str) -> int:
    base = 18  # root height/vel, facing rate, gait phase, feet
    ball = 0 if skill == "move" else 9
    goal = {"dribble": 3, "trap": 6, "move": 5, "kick": 4}[skill]
    return base + ball + goal


def features(skill: str, char: CharacterState, ball: BallState | None, goal) -> np.ndarray:
    """Observation vector in the character frame."""
    out = np.empty(feature_size(skill))
    vx, vy = _to_char_frame(char, char.root_vel.x, char.root_vel.y)
    out[0] = char.root_pos.z
    out[1], out[2] = vx, vy
    out[3] = char.facing_rate
    out[4] = math.cos(2.0 * math.pi * char.gait_phase)
    out[5] = math.sin(2.0 * math.pi * char.gait_phase)
    i = 6
    for f in range(2):
        fp, fv = char.foot_pos[f], char.foot_vel[f]
        px, py = _to_char_frame(char, fp.x - char.root_pos.x, fp.y - char.root_pos.y)
        wx, wy = _to_char_frame(char, fv.x, fv.y)
        out[i : i + 6] = (px, py, fp.z, wx, wy, fv.z)
        i += 6
    if skill != "move":
        if ball is None:
            raise ValueError(f"{skill} policy requires a ball state")
        bx, by = _to_char_frame(char, ball.pos.x - char.root_pos.x, ball.pos.y - char.root_pos.y)
        bvx, bvy = _to_char_frame(char, ball.vel.x, ball.vel.y)
        wx, wy = _to_char_frame(char, ball.ang_vel.x, ball.ang_vel.y)
        out[i : i + 9] = (bx, by, ball.pos.z, bvx, bvy, ball.vel.z, wx, wy, ball.ang_vel.z)
        i += 9
    if skill == "dribble":
        gx, gy = _to_char_frame(char, goal.velocity.x, goal.velocity.y)
        out[i : i + 3] = (gx, gy, goal.velocity.norm())
    elif skill == "trap":
        out[i : i + 6] = 0.0
        out[i + BODY_PARTS.index(goal.body_part)] = 1.0
    elif skill == "move":
        gx, gy = _to_char_frame(char, goal.velocity.x, goal.velocity.y)
        fx, fy = _to_char_frame(char, goal.facing.x, goal.facing.y)
        out[i : i + 5] = (gx, gy, goal.velocity.norm(), fx, fy)
    elif skill == "kick":
        gx, gy = _to_char_frame(char, goal.velocity.x, goal.velocity.y)
        out[i : i + 4] = (gx, gy, goal.velocity.z, goal.velocity.norm())
    return out


def param_count(layer_sizes: list[int]) -> int:
    return sum(layer_sizes[i] * layer_sizes[i + 1] + layer_sizes[i + 1]
               for i in range(len(layer_sizes) - 1))


@dataclass
class ParametricPolicy:
    """Tanh MLP over character-frame features, output projected to the sphere."""

    skill: str
    layer_sizes: list[int]
    params: np.ndarray
    codec: LatentCodec

    kind: str = "parametric"

    def __post_init__(self):
        want = param_count(self.layer_sizes)
        if len(self.params) != want:
            raise ValueError(f"expected {want} parameters, got {len(self.params)}")
        self._weights = []
        ofs = 0
        for i in range(len(self.layer_sizes) - 1):
            n_in, n_out = self.layer_sizes[i], self.layer_sizes[i + 1]
            w = self.params[ofs : ofs + n_in * n_out].reshape(n_out, n_in)
            ofs += n_in * n_out
            b = self.params[ofs : ofs + n_out]
            ofs += n_out
            self._weights.append((w, b))

    def act(self, char: CharacterState, ball: BallState | None, goal) -> np.ndarray:
        x = features(self.skill, char, ball, goal)
        last = len(self._weights) - 1
        for i, (w, b) in enumerate(self._weights):
            x = w @ x + b
            if i != last:
                np.tanh(x, out=x)
        n = float(np.linalg.norm(x))
        if n < 1e-9:
            z = np.zeros(self.layer_sizes[-1])
            z[0] = 1.0
            return z
        return x / n

    def save(self, path: str | Path, seed: int = 0) -> None:
        layers = ",".join(str(s) for s in self.layer_sizes)
        header = f"footsim-policy v1 skill={self.skill} kind=parametric layers={layers} seed={seed}\n"
        with open(path, "wb") as fh:
            fh.write(header.encode())
            fh.write(self.params.astype("<f8").tobytes())

    @classmethod
    def load(cls, path: str | Path, codec: LatentCodec | None = None) -> "ParametricPolicy":
        with open(path, "rb") as fh:
            header = fh.readline().decode().strip()
            body = fh.read()
        if not header.startswith("footsim-policy v1"):
            raise ValueError(f"unrecognized policy header: {header!r}")
        kv = dict(p.split("=") for p in header.split()[2:])
        layers = [int(s) for s in kv["layers"].split(",")]
        params = np.frombuffer(body, dtype="<f8").copy()
        return cls(kv["skill"], layers, params, codec or LatentCodec(layers[-1]))


def make_policy(skill: str, params: np.ndarray, hidden: int, codec: LatentCodec) -> ParametricPolicy:
    return ParametricPolicy(skill, [feature_size(skill), hidden, codec.dim], params, codec)


# ---------------------------------------------------------------------------
# training (cross-entropy method)
# ---------------------------------------------------------------------------

@dataclass
class TrainConfig:
    population: int = 32
    elites: int = 8
    iterations: int = 30
    episodes_per_candidate: int = 4
    init_stddev: float = 0.5
    min_stddev: float = 0.02
    seed: int = 0
    degcl_fraction: float = 0.8  # guided-episode share, move only
    hidden: int = 32
    latent_dim: int = 8
    episode_seconds: float = 10.0
    trap_stage_split: float = 0.5  # fraction of iterations on lob-only episodes
    sti_enabled: bool = True  # disable to initialize from a standing start
    fixed_eval_seeds: bool = False  # reuse one episode set across iterations
    train_readout_only: bool = False  # search only the output layer (warm starts)

    def __post_init__(self):
        if not self.elites < self.population:
            raise ValueError("elites must be < population")
        if not 0.0 <= self.degcl_fraction <= 1.0:
            raise ValueError("degcl_fraction must lie in [0, 1]")


@dataclass
class TrainResult:
    policy: ParametricPolicy
    log: list[dict]
    best_fitness: float
    baseline_fitness: float  # iteration-0 population mean
    guided_fraction: float  # measured share of guided episodes (move)


def clone_policy(
    skill: str,
    teacher,
    rng: np.random.Generator,
    hidden: int = 32,
    latent_dim: int = 8,
    episodes: int = 60,
    episode_ticks: int = 90,
    ridge: float = 1e-3,
    sim_cfg: SimConfig | None = None,
    codec: LatentCodec | None = None,
    buffers: dict[str, StiBuffer] | None = None,
    sti_enabled: bool = False,
) -> ParametricPolicy:
    """Distill a teacher controller into a parametric policy.

    The hidden layer is random and fixed; the readout solves a ridge
    regression from hidden activations to the teacher's latents over rollouts
    drawn from the arm's own initialization distribution (snapshot buffers
    when sti_enabled, standing starts otherwise).
    """
    sim_cfg = sim_cfg or SimConfig()
    codec = codec or LatentCodec(latent_dim)
    n_in = feature_size(skill)
    w1 = rng.normal(0.0, 1.0 / math.sqrt(n_in), size=(hidden, n_in))
    b1 = rng.normal(0.0, 0.1, size=hidden)
    xs, zs = [], []
    from .sim import control_step as _cs
    from .episodes import update_context as _uc, check_termination as _ct

    for _ in range(episodes):
        ep_rng = np.random.default_rng(int(rng.integers(2**63 - 1)))
        if sti_enabled and skill != "move":
            world, ctx = init_episode(skill, buffers, ep_rng, sim_cfg)
        else:
            world, ctx = _standing_start(skill, ep_rng, sim_cfg)
        char = world.players[0]
        if skill == "move":
            goal = sample_goal("move", ep_rng, mode="general")
        elif skill == "trap":
            goal = sample_goal("trap", ep_rng, pass_kind=ctx.pass_kind or "lob")
        elif skill == "kick":
            goal = sample_goal("kick", ep_rng, facing=char.facing)
        else:
            goal = sample_goal(skill, ep_rng)
        clock = 0
        while clock < episode_ticks:
            z = teacher.act(char, world.ball, goal)
            xs.append(features(skill, char, world.ball, goal))
            zs.append(z)
            events = _cs(world, sim_cfg, [codec.decode(z)])
            clock += 1
            _uc(ctx, clock, events)
            if _ct(skill, world, clock, ctx).done:
                break
    x = np.asarray(xs)
    z = np.asarray(zs)
    h = np.tanh(x @ w1.T + b1)
    a = h.T @ h + ridge * np.eye(hidden)
    w2 = np.linalg.solve(a, h.T @ z).T
    b2 = z.mean(axis=0) - w2 @ h.mean(axis=0)
    params = np.concatenate([w1.ravel(), b1, w2.ravel(), b2])
    return ParametricPolicy(skill, [n_in, hidden, latent_dim], params, codec)


def _standing_start(skill: str, rng, sim_cfg) -> tuple:
    """No-snapshot initialization: standing pose, ball placed per skill."""
    from .core import rest_pose
    from .sim import World

    char = rest_pose()
    ctx = EpisodeContext(skill, init_source="rest")
    if skill == "move":
        return World(None, [char]), ctx
    ang = rng.uniform(0.0, 2.0 * math.pi)
    if skill == "dribble":
        r = 1.0
        speed = rng.uniform(0.0, 1.0)
        va = rng.uniform(0.0, 2.0 * math.pi)
        ball = BallState(
            SpatialVec(r * math.cos(ang), r * math.sin(ang), 0.11),
            SpatialVec(speed * math.cos(va), speed * math.sin(va), 0.0),
        )
        return World(ball, [char]), ctx
    if skill == "kick":
        r = 2.0 * math.sqrt(rng.uniform(0.0, 1.0))
        ball = BallState(SpatialVec(r * math.cos(ang), r * math.sin(ang), 0.11),
                         SpatialVec(0.0, 0.0, 0.0))
        return World(ball, [char]), ctx
    if skill == "trap":
        from .episodes import init_lob_pass
        ball, _ = init_lob_pass(char, rng, sim_cfg.gravity)
        ctx.pass_kind = "lob"
        return World(ball, [char]), ctx
    raise ValueError(skill)


def _episode_setup(skill, cfg, buffers, ref_buffer, rng, sim_cfg, stage):
    if cfg.sti_enabled and skill != "move":
        world, ctx = init_episode(skill, buffers, rng, sim_cfg, trap_stage=stage)
    else:
        world, ctx = _standing_start(skill, rng, sim_cfg)
    guided = False
    char = world.players[0]
    if skill == "move":
        guided = rng.random() < cfg.degcl_fraction
        goal = sample_goal("move", rng, mode="guided" if guided else "general",
                           ref_buffer=ref_buffer)
    elif skill == "trap":
        goal = sample_goal("trap", rng, pass_kind=ctx.pass_kind or "lob")
    elif skill == "kick":
        goal = sample_goal("kick", rng, facing=char.facing)
    else:
        goal = sample_goal(skill, rng)
    return world, ctx, goal, guided


def train(
    skill: str,
    cfg: TrainConfig,
    buffers: dict[str, StiBuffer] | None = None,
    ref_buffer: RefBuffer | None = None,
    sim_cfg: SimConfig | None = None,
    reward_cfg: RewardConfig = DEFAULT_REWARDS,
    init_params: np.ndarray | None = None,
) -> TrainResult:
    """Cross-entropy search over parametric-policy weights.

    Fitness is the mean episodic return under the skill's reward,
    initialization, and termination rules; candidates within an iteration
    share episode seeds.
    """
    if skill not in BUFFER_PREREQS:
        raise ValueError(f"unknown skill {skill!r}")
    if cfg.sti_enabled:
        for req in BUFFER_PREREQS[skill]:
            if skill == "kick" and req != "dribble":
                continue
            if buffers is None or req not in buffers or len(buffers[req]) == 0:
                raise ValueError(
                    f"training {skill} requires the {req} snapshot buffer; train {req} first"
                )
    if skill == "move" and ref_buffer is None:
        ref_buffer = RefBuffer([])  # only valid when degcl_fraction == 0
        if cfg.degcl_fraction > 0:
            raise ValueError("move training with guided episodes requires a reference buffer")

    sim_cfg = sim_cfg or SimConfig(seed=cfg.seed)
    codec = LatentCodec(cfg.latent_dim)
    n = param_count([feature_size(skill), cfg.hidden, cfg.latent_dim])
    rng = np.random.default_rng(cfg.seed)
    if init_params is not None:
        if len(init_params) != n:
            raise ValueError("init_params size does not match the architecture")
        mean = np.asarray(init_params, dtype=float).copy()
    else:
        mean = np.zeros(n)
    std = np.full(n, cfg.init_stddev)
    max_ticks = max(1, int(cfg.episode_seconds * 30.0))

    best_params = mean.copy()
    best_fitness = -math.inf
    baseline = None
    log: list[dict] = []
    guided_count = 0
    episode_count = 0

    # optionally restrict the search to the readout layer
    sizes = [feature_size(skill), cfg.hidden, cfg.latent_dim]
    head = sizes[0] * sizes[1] + sizes[1]
    if cfg.train_readout_only:
        if init_params is None:
            raise ValueError("readout-only training requires warm-start parameters")
        free = slice(head, n)
    else:
        free = slice(0, n)
    n_free = free.stop - free.start

    frozen_seeds = rng.integers(0, 2**63 - 1, size=cfg.episodes_per_candidate)
    for it in range(cfg.iterations):
        stage = 1 if skill == "trap" and it < cfg.iterations * cfg.trap_stage_split else 2
        noise = rng.standard_normal((cfg.population, n_free))
        candidates = np.tile(mean, (cfg.population, 1))
        candidates[:, free] += std[None, free] * noise
        if cfg.fixed_eval_seeds:
            ep_seeds = frozen_seeds
        else:
            ep_seeds = rng.integers(0, 2**63 - 1, size=cfg.episodes_per_candidate)
        fitness = np.empty(cfg.population)
        for ci in range(cfg.population):
            policy = make_policy(skill, candidates[ci], cfg.hidden, codec)
            total = 0.0
            for seed in ep_seeds:
                ep_rng = np.random.default_rng(int(seed))
                world, ctx, goal, guided = _episode_setup(
                    skill, cfg, buffers, ref_buffer, ep_rng, sim_cfg, stage
                )
                if ci == 0:
                    episode_count += 1
                    guided_count += guided
                resampler = None
                if skill in ("dribble", "move"):
                    if skill == "move":
                        def resampler(r, _g=guided):  # keep episode kind on reset
                            return sample_goal(
                                "move", r, mode="guided" if _g else "general",
                                ref_buffer=ref_buffer,
                            )
                    else:
                        def resampler(r):
                            return sample_goal("dribble", r)
                res = run_episode(
                    skill, world, goal, ctx, policy.act, codec, sim_cfg, ep_rng,
                    reward_cfg, max_ticks=max_ticks, goal_resampler=resampler,
                )
                total += res.return_
            fitness[ci] = total / cfg.episodes_per_candidate

        order = np.argsort(fitness)[::-1]
        elite = candidates[order[: cfg.elites]]
        if baseline is None:
            baseline = float(fitness.mean())
        if fitness[order[0]] > best_fitness:
            best_fitness = float(fitness[order[0]])
            best_params = candidates[order[0]].copy()
        mean = elite.mean(axis=0)
        std = np.maximum(elite.std(axis=0), cfg.min_stddev)
        log.append({
            "iteration": it,
            "mean": float(fitness.mean()),
            "max": float(fitness.max()),
            "elite_mean": float(fitness[order[: cfg.elites]].mean()),
            "best_so_far": best_fitness,
        })

    # the distribution mean generalizes better than the single luckiest
    # candidate; best-so-far stays in the log for monotonicity checks
    policy = make_policy(skill, mean, cfg.hidden, codec)
    guided_fraction = guided_count / episode_count if episode_count else 0.0
    return TrainResult(policy, log, best_fitness, baseline, guided_fraction)


def save_training_log(log: list[dict], path: str | Path) -> None:
    lines = ["iteration,mean,max,elite_mean,best_so_far"]
    for row in log:
        lines.append(
            f"{row['iteration']},{row['mean']!r},{row['max']!r},"
            f"{row['elite_mean']!r},{row['best_so_far']!r}"
        )
    Path(path).write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# snapshot-buffer construction
# ---------------------------------------------------------------------------

def build_sti_buffer(
    skill: str,
    policy,
    count: int,
    rng: np.random.Generator,
    buffers: dict[str, StiBuffer] | None = None,
    ref_buffer: RefBuffer | None = None,
    sim_cfg: SimConfig | None = None,
    codec: LatentCodec | None = None,
) -> StiBuffer:
    """Roll episodes with training-distribution goals, recording snapshots.

    Move/dribble record every control tick; trap records only collision ticks.
    """
    if skill == "kick":
        raise ValueError("no snapshot buffer is defined for the kick skill")
    sim_cfg = sim_cfg or SimConfig()
    codec = codec or LatentCodec()
    out = StiBuffer(skill, capacity=count)
    guard = 0
    while len(out) < count:
        guard += 1
        if guard > count * 20 + 100:
            raise RuntimeError(f"snapshot collection for {skill} is not converging")
        if skill == "move":
            world, ctx = init_episode("move", None, rng, sim_cfg)
            goal = sample_goal("move", rng, mode="general", ref_buffer=ref_buffer)
        else:
            world, ctx = init_episode(skill, buffers, rng, sim_cfg)
            if skill == "trap":
                goal = sample_goal("trap", rng, pass_kind=ctx.pass_kind)
            else:
                goal = sample_goal(skill, rng)
        res = run_episode(
            skill, world, goal, ctx, policy.act, codec, sim_cfg, rng,
            collect_snapshots=True,
            goal_resampler=(lambda r: sample_goal(skill, r)) if skill == "dribble" else None,
        )
        for snap in res.snapshots:
            if len(out) >= count:
                break
            out.add(snap)
    return out
