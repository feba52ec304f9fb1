"""Reward tests against independent straight-line transcriptions of each formula."""
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from footsim.core import BallState, CharacterState, PlanarVec, SpatialVec, rest_pose
from footsim.rewards import (
    RewardConfig,
    dribble_reward,
    kick_reward,
    latent_similarity,
    move_reward,
    move_task_reward,
    nts_error,
    trap_reward,
)

EPS = 0.01


# ---------------------------------------------------------------------------
# Oracles: deliberately naive transcriptions, kept independent of the package.
# ---------------------------------------------------------------------------

def oracle_nts(target, actual, eps):
    tn = math.sqrt(target[0] ** 2 + target[1] ** 2)
    an = math.sqrt(actual[0] ** 2 + actual[1] ** 2)
    vel = math.sqrt((target[0] - actual[0]) ** 2 + (target[1] - actual[1]) ** 2) / (tn + eps)
    spd = (tn - an) / (tn + eps)
    return vel, spd


def oracle_ball_vel(goal, vball, eps):
    e1, e2 = oracle_nts(goal, vball, eps)
    return math.exp(-10.0 * (e1 ** 2 + 0.1 * e2 ** 2))


def oracle_pos_term(xball, xroot):
    d2 = (xball[0] - xroot[0]) ** 2 + (xball[1] - xroot[1]) ** 2
    return math.exp(-10.0 * d2)


def oracle_root_vel(goal, vroot, xroot, xball, facing, eps):
    dx, dy = xball[0] - xroot[0], xball[1] - xroot[1]
    d = math.sqrt(dx * dx + dy * dy)
    if d > 1e-9:
        u = (dx / d, dy / d)
    else:
        u = facing
    s = math.sqrt(goal[0] ** 2 + goal[1] ** 2)
    e1, e2 = oracle_nts((s * u[0], s * u[1]), vroot, eps)
    return math.exp(-10.0 * (e1 ** 2 + 0.1 * e2 ** 2))


def oracle_dribble(goal, ball_p, ball_v, root_p, root_v, facing, eps):
    return (
        0.6 * oracle_ball_vel(goal, ball_v, eps)
        + 0.2 * oracle_pos_term(ball_p, root_p)
        + 0.2 * oracle_root_vel(goal, root_v, root_p, ball_p, facing, eps)
    )


def oracle_trap_pre(ball_p3, body_p3):
    d2 = sum((a - b) ** 2 for a, b in zip(ball_p3, body_p3))
    return math.exp(-10.0 * d2)


def oracle_trap_post(ball_v3, root_v3):
    d2 = sum((a - b) ** 2 for a, b in zip(ball_v3, root_v3))
    return math.exp(-10.0 * d2)


def oracle_move_task(goal_v, goal_d, root_v, root_d, eps):
    e1, e2 = oracle_nts(goal_v, root_v, eps)
    r_vel = math.exp(-0.25 * (e1 ** 2 + 0.1 * e2 ** 2))
    r_dir = goal_d[0] * root_d[0] + goal_d[1] * root_d[1]
    return 0.7 * r_vel + 0.3 * r_dir


def oracle_kick(goal_v3, ball_v3, eps):
    diff = math.sqrt(sum((a - b) ** 2 for a, b in zip(goal_v3, ball_v3)))
    tn = math.sqrt(sum(a * a for a in goal_v3))
    return math.exp(-((diff / (tn + eps)) ** 2))


def make_char(root_p=(0, 0), root_v=(0, 0), facing=(1, 0)):
    char = rest_pose(root_p[0], root_p[1], PlanarVec(*facing))
    char.root_vel = SpatialVec(root_v[0], root_v[1], 0.0)
    return char


def make_ball(p=(0, 0, 0.11), v=(0, 0, 0)):
    return BallState(SpatialVec(*p), SpatialVec(*v))


class TestNts:
    def test_zero_error(self):
        assert nts_error(2, 0, 2, 0, EPS) == (0.0, 0.0)

    def test_frozen_example(self):
        vel, spd = nts_error(2, 0, 1, 0, EPS)
        assert vel == pytest.approx(0.49751243781094534, abs=1e-12)
        assert spd == pytest.approx(0.49751243781094534, abs=1e-12)

    @settings(max_examples=100, deadline=None)
    @given(
        tx=st.floats(-10, 10), ty=st.floats(-10, 10),
        ax=st.floats(-10, 10), ay=st.floats(-10, 10),
        k=st.sampled_from([0.5, 2.0, 4.0, 8.0, 0.25]),
    )
    def test_scale_invariance_eps_zero(self, tx, ty, ax, ay, k):
        # powers of two scale the errors exactly
        if math.hypot(tx, ty) < 1e-6:
            return
        base = nts_error(tx, ty, ax, ay, 0.0)
        scaled = nts_error(k * tx, k * ty, k * ax, k * ay, 0.0)
        assert scaled[0] == base[0]
        assert scaled[1] == base[1]


class TestDribble:
    def test_near_perfect_is_one(self):
        goal = PlanarVec(2.0, 0.0)
        char = make_char(root_v=(2, 0))
        ball = make_ball(p=(1e-6, 0, 0.11), v=(2, 0, 0))
        total, _ = dribble_reward(goal, ball, char)
        assert total == pytest.approx(1.0, abs=1e-3)

    def test_position_component_frozen(self):
        goal = PlanarVec(2.0, 0.0)
        char = make_char(root_v=(2, 0))
        ball = make_ball(p=(0.5, 0, 0.11), v=(2, 0, 0))
        _, parts = dribble_reward(goal, ball, char)
        assert 0.2 * parts["ball_root_pos"] == pytest.approx(0.016416999724779762, abs=1e-9)

    def test_ball_vel_component_frozen(self):
        goal = PlanarVec(2.0, 0.0)
        char = make_char()
        ball = make_ball(p=(0.3, 0, 0.11), v=(1, 0, 0))
        _, parts = dribble_reward(goal, ball, char)
        assert parts["ball_vel"] == pytest.approx(0.06569681165302081, abs=1e-9)

    def test_oracle_agreement(self):
        rng = np.random.default_rng(11)
        for _ in range(3000):
            goal = rng.uniform(-7, 7, 2)
            bp = rng.uniform(-3, 3, 2)
            bv = rng.uniform(-8, 8, 2)
            rv = rng.uniform(-7, 7, 2)
            theta = rng.uniform(-math.pi, math.pi)
            facing = (math.cos(theta), math.sin(theta))
            char = make_char(root_v=rv, facing=facing)
            ball = make_ball(p=(bp[0], bp[1], 0.11), v=(bv[0], bv[1], 0))
            got, _ = dribble_reward(PlanarVec(*goal), ball, char)
            want = oracle_dribble(goal, bp, bv, (0, 0), rv, facing, EPS)
            assert got == pytest.approx(want, abs=1e-12)

    def test_nonfinite_state_raises(self):
        char = make_char()
        ball = make_ball(v=(math.nan, 0, 0))
        with pytest.raises(ValueError):
            dribble_reward(PlanarVec(1, 0), ball, char)


class TestTrap:
    def test_touching_target_pre_reward_one(self):
        char = make_char()
        ball = BallState(char.body_point("torso"), SpatialVec(0, 0, 0))
        assert trap_reward("torso", ball, char, False) == pytest.approx(1.0)

    def test_distance_point_three(self):
        char = make_char()
        target = char.body_point("head")
        ball = BallState(SpatialVec(target.x + 0.3, target.y, target.z), SpatialVec(0, 0, 0))
        assert trap_reward("head", ball, char, False) == pytest.approx(0.40656965974059917, abs=1e-12)

    def test_post_phase_matched_velocity(self):
        char = make_char(root_v=(1.5, 0.5))
        ball = make_ball(v=(1.5, 0.5, 0))
        assert trap_reward("foot_L", ball, char, True) == pytest.approx(1.0)

    def test_unknown_body_part(self):
        with pytest.raises(KeyError):
            trap_reward("elbow", make_ball(), make_char(), False)

    def test_oracle_agreement(self):
        rng = np.random.default_rng(12)
        parts = ["head", "torso", "lower_leg_L", "lower_leg_R", "foot_L", "foot_R"]
        for i in range(2000):
            char = make_char(
                root_p=rng.uniform(-5, 5, 2),
                root_v=rng.uniform(-5, 5, 2),
                facing=(math.cos(rng.uniform(0, 7)), math.sin(rng.uniform(0, 7))),
            )
            bp = rng.uniform(-5, 5, 3)
            bv = rng.uniform(-10, 10, 3)
            ball = BallState(SpatialVec(*bp), SpatialVec(*bv))
            part = parts[i % 6]
            pre = trap_reward(part, ball, char, False)
            tgt = char.body_point(part)
            assert pre == pytest.approx(oracle_trap_pre(bp, (tgt.x, tgt.y, tgt.z)), abs=1e-12)
            post = trap_reward(part, ball, char, True)
            rv = (char.root_vel.x, char.root_vel.y, char.root_vel.z)
            assert post == pytest.approx(oracle_trap_post(bv, rv), abs=1e-12)


class TestMove:
    def test_perfect(self):
        char = make_char(root_v=(3, 0))
        total, _ = move_task_reward(PlanarVec(3, 0), PlanarVec(1, 0), char)
        assert total == pytest.approx(1.0, abs=1e-9)

    def test_frozen_standing_start(self):
        char = make_char(root_v=(0, 0))
        total, parts = move_task_reward(PlanarVec(3, 0), PlanarVec(1, 0), char)
        assert parts["vel"] == pytest.approx(0.7609590047852827, abs=1e-9)
        assert total == pytest.approx(0.8326713033496977, abs=1e-9)

    def test_opposite_facing(self):
        char = make_char(root_v=(3, 0), facing=(-1, 0))
        total, _ = move_task_reward(PlanarVec(3, 0), PlanarVec(1, 0), char)
        assert total == pytest.approx(0.4, abs=1e-9)

    def test_guided_mix(self):
        char = make_char(root_v=(3, 0))
        ref = np.zeros(8)
        ref[0] = 1.0
        out = np.zeros(8)
        out[0] = 0.6
        out[1] = 0.8
        total, parts = move_reward(PlanarVec(3, 0), PlanarVec(1, 0), char, True, ref, out)
        assert total == pytest.approx(0.5 * parts["task"] + 0.5 * 0.6, abs=1e-12)

    def test_guided_requires_ref(self):
        with pytest.raises(ValueError):
            move_reward(PlanarVec(1, 0), PlanarVec(1, 0), make_char(), True, None, np.zeros(8))

    def test_general_passthrough(self):
        char = make_char(root_v=(1, 1))
        task, _ = move_task_reward(PlanarVec(2, 0), PlanarVec(0, 1), char)
        total, _ = move_reward(PlanarVec(2, 0), PlanarVec(0, 1), char, False, None, None)
        assert total == task

    def test_oracle_agreement(self):
        rng = np.random.default_rng(13)
        for _ in range(2000):
            gv = rng.uniform(-7, 7, 2)
            th_g, th_r = rng.uniform(-math.pi, math.pi, 2)
            rv = rng.uniform(-7, 7, 2)
            char = make_char(root_v=rv, facing=(math.cos(th_r), math.sin(th_r)))
            goal_d = PlanarVec(math.cos(th_g), math.sin(th_g))
            got, _ = move_task_reward(PlanarVec(*gv), goal_d, char)
            want = oracle_move_task(gv, (goal_d.x, goal_d.y), rv, (char.facing.x, char.facing.y), EPS)
            assert got == pytest.approx(want, abs=1e-12)


class TestLatentSimilarity:
    def test_identical(self):
        z = np.array([1.0, 0, 0, 0])
        assert latent_similarity(z, z) == 1.0

    def test_orthogonal(self):
        assert latent_similarity(np.array([1.0, 0]), np.array([0.0, 1])) == 0.0

    def test_antipodal(self):
        z = np.array([0.6, 0.8])
        assert latent_similarity(z, -z) == pytest.approx(-1.0)


class TestKick:
    def test_perfect(self):
        assert kick_reward(SpatialVec(10, 0, 0), make_ball(v=(10, 0, 0))) == pytest.approx(1.0)

    def test_frozen_nine(self):
        got = kick_reward(SpatialVec(10, 0, 0), make_ball(v=(9, 0, 0)))
        assert got == pytest.approx(0.990069605281319, abs=1e-12)

    def test_frozen_rest(self):
        got = kick_reward(SpatialVec(10, 0, 0), make_ball(v=(0, 0, 0)))
        assert got == pytest.approx(0.3686148319298871, abs=1e-12)

    def test_oracle_agreement(self):
        rng = np.random.default_rng(14)
        for _ in range(2000):
            gv = rng.uniform(-35, 35, 3)
            bv = rng.uniform(-35, 35, 3)
            got = kick_reward(SpatialVec(*gv), make_ball(v=bv))
            assert got == pytest.approx(oracle_kick(gv, bv, EPS), abs=1e-12)


class TestBounds:
    def test_exponential_components_in_unit_interval(self):
        # strictly positive except where the exponent underflows float range
        rng = np.random.default_rng(15)
        for _ in range(500):
            goal = PlanarVec(*rng.uniform(-7, 7, 2))
            char = make_char(root_v=rng.uniform(-7, 7, 2))
            ball = make_ball(p=(*rng.uniform(-3, 3, 2), 0.11), v=(*rng.uniform(-8, 8, 2), 0))
            total, parts = dribble_reward(goal, ball, char)
            for v in parts.values():
                assert 0.0 <= v <= 1.0
            assert parts["ball_root_pos"] > 0.0  # exponent bounded by arena size
            assert 0.0 <= total <= 1.0

    def test_move_total_range(self):
        rng = np.random.default_rng(16)
        for _ in range(500):
            th = rng.uniform(-math.pi, math.pi)
            char = make_char(root_v=rng.uniform(-7, 7, 2), facing=(math.cos(th), math.sin(th)))
            th2 = rng.uniform(-math.pi, math.pi)
            total, _ = move_task_reward(
                PlanarVec(*rng.uniform(-7, 7, 2)), PlanarVec(math.cos(th2), math.sin(th2)), char
            )
            assert -0.3 <= total <= 1.0

    def test_nts_monotone_in_vel_err(self):
        # holding speed error fixed, larger velocity error decreases the term
        cfg = RewardConfig()
        prev = None
        for vel_err in np.linspace(0.0, 3.0, 25):
            r = math.exp(-10.0 * (vel_err ** 2 + 0.1 * 0.2 ** 2))
            if prev is not None:
                assert r < prev
            prev = r
