"""Skill reward functions with normalization by target speed.

All velocity errors inside the exponentials are divided by (target speed + eps)
so the reward signal stays consistent across target magnitudes.  Horizontal
quantities are used for dribble/move terms, full 3D for trap/kick, matching
the per-skill definitions.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

from .core import BallState, CharacterState, PlanarVec, SpatialVec


@dataclass(slots=True)
class RewardConfig:
    epsilon: float = 0.01  # m/s; guards zero target speed
    nts_enabled: bool = True
    dribble_weights: tuple[float, float, float] = (0.6, 0.2, 0.2)
    move_weights: tuple[float, float] = (0.7, 0.3)
    move_mix: tuple[float, float] = (0.5, 0.5)  # task vs latent similarity
    sharpness: float = 10.0  # exponent coefficient for dribble/trap terms
    move_sharpness: float = 0.25  # exponent coefficient for the move velocity term
    speed_term_weight: float = 0.1
    trap_post_ticks: int = 5  # 1/6 s at 30 Hz control
    kick_window_ticks: int = 10  # 1/3 s at 30 Hz control

    def __post_init__(self):
        if self.epsilon < 0:
            raise ValueError("epsilon must be >= 0")
        for w, n in ((self.dribble_weights, 3), (self.move_weights, 2), (self.move_mix, 2)):
            if len(w) != n or abs(sum(w) - 1.0) > 1e-9:
                raise ValueError(f"weights {w} must have {n} entries summing to 1")


DEFAULT_REWARDS = RewardConfig()


def nts_error(target_x, target_y, actual_x, actual_y, eps):
    """(velocity error, speed error), both divided by target speed + eps."""
    tnorm = math.hypot(target_x, target_y)
    denom = tnorm + eps
    vel_err = math.hypot(target_x - actual_x, target_y - actual_y) / denom
    speed_err = (tnorm - math.hypot(actual_x, actual_y)) / denom
    return vel_err, speed_err


def _nts_exp(target_x, target_y, actual_x, actual_y, coeff, speed_w, eps):
    vel_err, speed_err = nts_error(target_x, target_y, actual_x, actual_y, eps)
    return math.exp(-coeff * (vel_err * vel_err + speed_w * speed_err * speed_err))


def dribble_reward(
    goal_vel: PlanarVec,
    ball: BallState,
    char: CharacterState,
    cfg: RewardConfig = DEFAULT_REWARDS,
) -> tuple[float, dict[str, float]]:
    """Weighted ball-velocity, ball-root proximity, and root-velocity terms.

    The root-velocity term tracks the target speed directed toward the ball's
    current horizontal position; if the ball sits exactly on the root axis the
    direction degenerates and the facing direction substitutes.
    """
    if not all(map(math.isfinite, (*ball.pos, *ball.vel, *char.root_pos, *char.root_vel))):
        raise ValueError("non-finite ball or character state")
    eps = cfg.epsilon
    c = cfg.sharpness
    sw = cfg.speed_term_weight
    w_bv, w_pos, w_rv = cfg.dribble_weights

    r_ball_vel = _nts_exp(goal_vel.x, goal_vel.y, ball.vel.x, ball.vel.y, c, sw, eps)

    dx = ball.pos.x - char.root_pos.x
    dy = ball.pos.y - char.root_pos.y
    dist_sq = dx * dx + dy * dy
    r_pos = math.exp(-c * dist_sq)

    dist = math.sqrt(dist_sq)
    if dist > 1e-9:
        ux, uy = dx / dist, dy / dist
    else:
        ux, uy = char.facing.x, char.facing.y
    tnorm = goal_vel.norm()
    r_root_vel = _nts_exp(tnorm * ux, tnorm * uy, char.root_vel.x, char.root_vel.y, c, sw, eps)

    total = w_bv * r_ball_vel + w_pos * r_pos + w_rv * r_root_vel
    return total, {"ball_vel": r_ball_vel, "ball_root_pos": r_pos, "root_vel": r_root_vel}


def trap_reward(
    body_part: str,
    ball: BallState,
    char: CharacterState,
    collided_yet: bool,
    cfg: RewardConfig = DEFAULT_REWARDS,
) -> float:
    """Two phases: approach the target body point, then absorb ball momentum.

    The post-collision phase is only meaningful for a short window after the
    first contact; the episode logic enforces the window.
    """
    if not collided_yet:
        target = char.body_point(body_part)  # KeyError on unknown part
        d = ball.pos.sub(target).norm()
        return math.exp(-cfg.sharpness * d * d)
    dv = ball.vel.sub(char.root_vel).norm()
    return math.exp(-cfg.sharpness * dv * dv)


def move_task_reward(
    goal_vel: PlanarVec,
    goal_face: PlanarVec,
    char: CharacterState,
    cfg: RewardConfig = DEFAULT_REWARDS,
) -> tuple[float, dict[str, float]]:
    """Velocity tracking plus facing alignment (dot product term)."""
    w_vel, w_dir = cfg.move_weights
    r_vel = _nts_exp(
        goal_vel.x,
        goal_vel.y,
        char.root_vel.x,
        char.root_vel.y,
        cfg.move_sharpness,
        cfg.speed_term_weight,
        cfg.epsilon,
    )
    r_dir = goal_face.x * char.facing.x + goal_face.y * char.facing.y
    total = w_vel * r_vel + w_dir * r_dir
    return total, {"vel": r_vel, "dir": r_dir}


def latent_similarity(ref, out) -> float:
    """Cosine similarity of two unit latents (plain dot product)."""
    return float((ref * out).sum())


def move_reward(
    goal_vel: PlanarVec,
    goal_face: PlanarVec,
    char: CharacterState,
    is_guided: bool,
    ref_latent,
    out_latent,
    cfg: RewardConfig = DEFAULT_REWARDS,
) -> tuple[float, dict[str, float]]:
    """Task reward, mixed 50/50 with latent similarity on guided episodes."""
    task, parts = move_task_reward(goal_vel, goal_face, char, cfg)
    if not is_guided:
        return task, parts
    if ref_latent is None:
        raise ValueError("guided move episode requires a reference latent")
    sim = latent_similarity(ref_latent, out_latent)
    w_task, w_sim = cfg.move_mix
    parts = dict(parts, lt_sim=sim, task=task)
    return w_task * task + w_sim * sim, parts


def kick_reward(
    goal_vel: SpatialVec,
    ball: BallState,
    cfg: RewardConfig = DEFAULT_REWARDS,
) -> float:
    """Match the kicked ball's 3D velocity to the target (unit exponent)."""
    diff = goal_vel.sub(ball.vel).norm()
    err = diff / (goal_vel.norm() + cfg.epsilon)
    return math.exp(-err * err)
