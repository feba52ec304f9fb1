"""Acceptance suite: one test per release criterion, each printing a verdict line.

Run with `pytest tests/test_acceptance.py -v -s` to see the verdict lines.
"""
import math
import time

import numpy as np
import pytest

from footsim.cli import main
from footsim.core import (
    BallState,
    PlanarVec,
    SpatialVec,
    horizontal_distance,
    rest_pose,
)
from footsim.episodes import (
    DribbleGoal,
    EpisodeContext,
    KickGoal,
    Snapshot,
    StiBuffer,
    check_termination,
    init_episode,
    init_lob_pass,
    lob_flight,
    sample_goal,
    update_context,
)
from footsim.fsm import CommandSet, FsmState, next_state, transition_table
from footsim.metrics import (
    ProtocolContext,
    cbd,
    cs,
    dgar,
    dgar30_tadg,
    fbd,
    gmls,
    kick_bundle,
    mgar,
    run_protocol,
    tsr_hrts_rbspt,
    ttk,
)
from footsim.motion import LatentCodec, build_ref_buffer
from footsim.rewards import (
    dribble_reward,
    kick_reward,
    latent_similarity,
    move_reward,
    move_task_reward,
    nts_error,
    trap_reward,
)
from footsim.scenarios import make_scenario
from footsim.sim import CollisionEvent, SimConfig, World, control_step, step
from footsim.skills import AnalyticPolicy, build_sti_buffer, clone_policy, train, TrainConfig
from footsim.trajectory import Frame, PlayerFrame, Trajectory, load


def verdict(name: str, ok: bool, detail: str = ""):
    print(f"{'PASS' if ok else 'FAIL'}: {name}" + (f" ({detail})" if detail else ""))
    assert ok, f"{name}: {detail}"


@pytest.fixture(scope="module")
def codec():
    return LatentCodec()


@pytest.fixture(scope="module")
def sim_cfg():
    return SimConfig()


@pytest.fixture(scope="module")
def analytic(codec, sim_cfg):
    return {s: AnalyticPolicy(s, codec, sim_cfg) for s in ("move", "trap", "dribble", "kick")}


@pytest.fixture(scope="module")
def buffers(codec, sim_cfg, analytic):
    rng = np.random.default_rng(0)
    move_buf = build_sti_buffer("move", analytic["move"], 400, rng, sim_cfg=sim_cfg, codec=codec)
    trap_buf = build_sti_buffer("trap", analytic["trap"], 200, rng,
                                buffers={"move": move_buf}, sim_cfg=sim_cfg, codec=codec)
    drib_buf = build_sti_buffer("dribble", analytic["dribble"], 400, rng,
                                buffers={"move": move_buf, "trap": trap_buf},
                                sim_cfg=sim_cfg, codec=codec)
    return {"move": move_buf, "trap": trap_buf, "dribble": drib_buf}


# ---------------------------------------------------------------------------
# 1. projectile math
# ---------------------------------------------------------------------------

def test_projectile_math(sim_cfg):
    t0 = time.time()
    rng = np.random.default_rng(1)
    g = 9.8
    worst = 0.0
    for _ in range(1000):
        v0 = rng.uniform(10.0, 30.0)
        phi = rng.uniform(math.radians(10), math.radians(45))
        d, t = lob_flight(v0, phi, g)
        worst = max(worst, abs(t - 2 * v0 * math.sin(phi) / g))
        worst = max(worst, abs(d - v0 * v0 * math.sin(2 * phi) / g))
    identities_ok = worst <= 1e-12

    cfg = SimConfig(ball_linear_damping=0.0, ball_angular_damping=0.0,
                    ball_rolling_friction=0.0, ball_friction=0.0, ground_friction=0.0)
    worst_landing = 0.0
    for _ in range(1000):
        char = rest_pose(float(rng.uniform(-3, 3)), float(rng.uniform(-3, 3)))
        ball, spec = init_lob_pass(char, rng, cfg.gravity)
        world = World(ball, [])
        landing = None
        while landing is None:
            step(world, cfg, [])
            for e in world.events:
                if e.part == "ground":
                    landing = e.pos
                    break
        err = math.hypot(landing.x - spec.landing.x, landing.y - spec.landing.y)
        worst_landing = max(worst_landing, err)
    elapsed = time.time() - t0
    verdict(
        "projectile closed forms exact to 1e-12 and drag-free lobs land within 0.05 m",
        identities_ok and worst_landing < 0.05 and elapsed < 10.0,
        f"identity err {worst:.2e}, worst landing {worst_landing:.4f} m, {elapsed:.1f}s",
    )


# ---------------------------------------------------------------------------
# 2. reward oracles
# ---------------------------------------------------------------------------

def _oracle_nts(tx, ty, ax, ay, eps):
    tn = math.sqrt(tx * tx + ty * ty)
    return (
        math.sqrt((tx - ax) ** 2 + (ty - ay) ** 2) / (tn + eps),
        (tn - math.sqrt(ax * ax + ay * ay)) / (tn + eps),
    )


def test_reward_oracles():
    rng = np.random.default_rng(2)
    eps = 0.01
    worst = 0.0
    n = 100_000
    gv = rng.uniform(-7, 7, (n, 2))
    bp = rng.uniform(-3, 3, (n, 2))
    bv = rng.uniform(-8, 8, (n, 2))
    rv = rng.uniform(-7, 7, (n, 2))
    th = rng.uniform(-math.pi, math.pi, (n, 2))
    kv = rng.uniform(-35, 35, (n, 3))
    bv3 = rng.uniform(-35, 35, (n, 3))
    for i in range(n):
        char = rest_pose(0.0, 0.0, PlanarVec(math.cos(th[i, 0]), math.sin(th[i, 0])))
        char.root_vel = SpatialVec(rv[i, 0], rv[i, 1], 0.0)
        ball = BallState(SpatialVec(bp[i, 0], bp[i, 1], 0.11), SpatialVec(bv[i, 0], bv[i, 1], 0.0))
        # dribble (Eq. 1 with the Appendix C component forms)
        got, _ = dribble_reward(PlanarVec(*gv[i]), ball, char)
        e1, e2 = _oracle_nts(gv[i, 0], gv[i, 1], bv[i, 0], bv[i, 1], eps)
        r_bv = math.exp(-10 * (e1 * e1 + 0.1 * e2 * e2))
        d2 = (bp[i, 0]) ** 2 + (bp[i, 1]) ** 2
        r_pos = math.exp(-10 * d2)
        dd = math.sqrt(d2)
        ux, uy = (bp[i, 0] / dd, bp[i, 1] / dd) if dd > 1e-9 else (char.facing.x, char.facing.y)
        s = math.hypot(gv[i, 0], gv[i, 1])
        e1, e2 = _oracle_nts(s * ux, s * uy, rv[i, 0], rv[i, 1], eps)
        r_rv = math.exp(-10 * (e1 * e1 + 0.1 * e2 * e2))
        worst = max(worst, abs(got - (0.6 * r_bv + 0.2 * r_pos + 0.2 * r_rv)))
        # trap (Eq. 2, both phases)
        part = ("head", "torso", "lower_leg_L", "lower_leg_R", "foot_L", "foot_R")[i % 6]
        pre = trap_reward(part, ball, char, False)
        tgt = char.body_point(part)
        d2 = (ball.pos.x - tgt.x) ** 2 + (ball.pos.y - tgt.y) ** 2 + (ball.pos.z - tgt.z) ** 2
        worst = max(worst, abs(pre - math.exp(-10 * d2)))
        post = trap_reward(part, ball, char, True)
        dv2 = (ball.vel.x - char.root_vel.x) ** 2 + (ball.vel.y - char.root_vel.y) ** 2 + \
              (ball.vel.z - char.root_vel.z) ** 2
        worst = max(worst, abs(post - math.exp(-10 * dv2)))
        # move task (Eq. 3 / appendix coefficient 0.25)
        face = PlanarVec(math.cos(th[i, 1]), math.sin(th[i, 1]))
        got, _ = move_task_reward(PlanarVec(*gv[i]), face, char)
        e1, e2 = _oracle_nts(gv[i, 0], gv[i, 1], rv[i, 0], rv[i, 1], eps)
        r_vel = math.exp(-0.25 * (e1 * e1 + 0.1 * e2 * e2))
        r_dir = face.x * char.facing.x + face.y * char.facing.y
        worst = max(worst, abs(got - (0.7 * r_vel + 0.3 * r_dir)))
        # kick (Eq. 6, unit exponent)
        kball = BallState(SpatialVec(0, 0, 0.11), SpatialVec(*bv3[i]))
        got = kick_reward(SpatialVec(*kv[i]), kball)
        diff = math.sqrt(sum((kv[i, j] - bv3[i, j]) ** 2 for j in range(3)))
        tn = math.sqrt(sum(kv[i, j] ** 2 for j in range(3)))
        worst = max(worst, abs(got - math.exp(-((diff / (tn + eps)) ** 2))))
    # latent mixing (Eqs. 4-5)
    z1 = rng.normal(size=8); z1 /= np.linalg.norm(z1)
    z2 = rng.normal(size=8); z2 /= np.linalg.norm(z2)
    char = rest_pose()
    char.root_vel = SpatialVec(1.0, 0.0, 0.0)
    total, _ = move_reward(PlanarVec(1, 0), PlanarVec(1, 0), char, True, z1, z2)
    task, _ = move_task_reward(PlanarVec(1, 0), PlanarVec(1, 0), char)
    mix_err = abs(total - (0.5 * task + 0.5 * float(np.dot(z1, z2))))
    worst = max(worst, mix_err)
    verdict("reward formulas match independent transcriptions on 1e5 inputs to 1e-12",
            worst <= 1e-12, f"worst |err| {worst:.2e}")

    # NTS scale invariance, eps = 0 test mode
    worst_s = 0.0
    for _ in range(2000):
        tx, ty = rng.uniform(-7, 7, 2)
        ax, ay = rng.uniform(-8, 8, 2)
        if math.hypot(tx, ty) < 1e-3:
            continue
        base = nts_error(tx, ty, ax, ay, 0.0)
        for k in rng.uniform(0.1, 100.0, 4):
            scaled = nts_error(k * tx, k * ty, k * ax, k * ay, 0.0)
            worst_s = max(worst_s, abs(scaled[0] - base[0]), abs(scaled[1] - base[1]))
    verdict("target-speed normalization scale-invariant (eps=0) within 1e-12",
            worst_s <= 1e-12, f"worst |err| {worst_s:.2e}")


# ---------------------------------------------------------------------------
# 3. restitution drop test
# ---------------------------------------------------------------------------

def test_restitution_drop():
    cfg = SimConfig(ball_linear_damping=0.0, ball_angular_damping=0.0,
                    ground_restitution=0.8, ball_restitution=0.8,
                    ground_friction=0.0, ball_friction=0.0, ball_rolling_friction=0.0)
    world = World(BallState(SpatialVec(0, 0, 1.0 + 0.11), SpatialVec(0, 0, 0)), [])
    bounced, apex = False, 0.0
    for _ in range(240):
        step(world, cfg, [])
        bounced = bounced or any(e.part == "ground" for e in world.events)
        if bounced:
            apex = max(apex, world.ball.pos.z - 0.11)
    ok = bounced and abs(apex - 0.64) <= 0.03 * 0.64
    verdict("drop test with e=0.8 rebounds to 0.64 h within 3%", ok, f"apex {apex:.4f} m")


# ---------------------------------------------------------------------------
# 4. FSM exhaustive enumeration
# ---------------------------------------------------------------------------

def test_fsm_exhaustive():
    table = transition_table()
    mismatches = 0
    for (state, ts, te, ks, ke, near, appr, col), want in table.items():
        dist = 1.5 if near else 2.5
        vel = SpatialVec(-1.0, 0.0, 0.0) if appr else SpatialVec(1.0, 0.0, 0.0)
        world = World(BallState(SpatialVec(dist, 0, 0.11), vel), [rest_pose()])
        events = []
        if col:
            z = SpatialVec(0, 0, 0)
            events = [CollisionEvent(0, 0, "torso", z, z, z)]
        got, _ = next_state(state, CommandSet(ts, te, ks, ke), world, 0, events)
        mismatches += got is not want
    verdict("FSM enumeration matches the transition table on all combinations",
            mismatches == 0, f"{len(table)} combinations, {mismatches} mismatches")


# ---------------------------------------------------------------------------
# 5. metric oracles on synthetic trajectories
# ---------------------------------------------------------------------------

def _mk_player(rng, goal, latent):
    th = rng.uniform(0, 2 * math.pi)
    char_facing = (math.cos(th), math.sin(th))
    return PlayerFrame(
        SpatialVec(*rng.uniform(-3, 3, 2), 0.9),
        SpatialVec(*rng.uniform(-7, 7, 2), 0.0),
        PlanarVec(*char_facing),
        (SpatialVec(*rng.uniform(-1, 1, 2), 0.05), SpatialVec(*rng.uniform(-1, 1, 2), 0.05)),
        (SpatialVec(0, 0, 0), SpatialVec(0, 0, 0)),
        (bool(rng.integers(2)), bool(rng.integers(2))),
        "dribble", goal, latent, {},
    )


def _mk_frame(rng, tick, goal, latent=(), events=()):
    ball = BallState(SpatialVec(*rng.uniform(-3, 3, 2), 0.11),
                     SpatialVec(*rng.uniform(-7, 7, 2), rng.uniform(-3, 3)))
    return Frame(tick, ball, [_mk_player(rng, goal, list(latent))], list(events))


def _contact(tick, part="foot_R", player=0):
    z = SpatialVec(0, 0, 0)
    return CollisionEvent(tick, player, part, z, z, z)


def test_metric_oracles(codec):
    rng = np.random.default_rng(5)
    ref_buffer = build_ref_buffer(codec)
    worst = 0.0
    checked = set()
    for case in range(50):
        # continuous trajectory with resets every 8 ticks
        frames, resets = [], []
        goal = None
        for t in range(48):
            if t % 8 == 0:
                sp = rng.uniform(1, 7)
                a = rng.uniform(0, 2 * math.pi)
                fa = rng.uniform(0, 2 * math.pi)
                goal = {"skill": "move", "velocity": [sp * math.cos(a), sp * math.sin(a)],
                        "facing": [math.cos(fa), math.sin(fa)]}
                resets.append(t)
            z = rng.normal(size=8)
            z /= np.linalg.norm(z)
            frames.append(_mk_frame(rng, t, goal, z.tolist()))
        traj = Trajectory({}, frames)
        ctx = ProtocolContext(goal_resets=resets, ref_buffer=ref_buffer)

        # CBD / CS oracles
        want = np.mean([
            math.hypot(f.ball.pos.x - f.players[0].root_pos.x,
                       f.ball.pos.y - f.players[0].root_pos.y) for f in frames
        ])
        worst = max(worst, abs(cbd(traj, ctx).value - want)); checked.add("CBD")
        want = np.mean([math.hypot(f.players[0].root_vel.x, f.players[0].root_vel.y)
                        for f in frames])
        worst = max(worst, abs(cs(traj, ctx).value - want)); checked.add("CS")

        # FBD oracle (contact onsets)
        tot, cnt = 0.0, 0
        for i in range(1, len(frames)):
            for foot in range(2):
                if frames[i].players[0].foot_contact[foot] and \
                        not frames[i - 1].players[0].foot_contact[foot]:
                    fp = frames[i].players[0].foot_pos[foot]
                    tot += math.hypot(frames[i].ball.pos.x - fp.x, frames[i].ball.pos.y - fp.y)
                    cnt += 1
        if cnt:
            worst = max(worst, abs(fbd(traj, ctx).value - tot / cnt)); checked.add("FBD")

        # DGAR / MGAR oracles
        ach = 0
        for si in range(len(resets)):
            s = resets[si]
            e = resets[si + 1] if si + 1 < len(resets) else 48
            g = frames[s].players[0].goal["velocity"]
            tol = 0.1 * math.hypot(*g)
            if any(math.hypot(f.ball.vel.x - g[0], f.ball.vel.y - g[1]) <= tol
                   for f in frames[s:e]):
                ach += 1
        worst = max(worst, abs(dgar(traj, ctx).value - 100.0 * ach / len(resets)))
        checked.add("DGAR")
        ach = 0
        for si in range(len(resets)):
            s = resets[si]
            e = resets[si + 1] if si + 1 < len(resets) else 48
            g = frames[s].players[0].goal
            tol = 0.1 * math.hypot(*g["velocity"])
            hit = False
            for f in frames[s:e]:
                p = f.players[0]
                dv = math.hypot(p.root_vel.x - g["velocity"][0], p.root_vel.y - g["velocity"][1])
                cosang = p.facing.x * g["facing"][0] + p.facing.y * g["facing"][1]
                if dv <= tol and cosang >= math.cos(math.radians(20)):
                    hit = True
                    break
            ach += hit
        worst = max(worst, abs(mgar(traj, ctx).value - 100.0 * ach / len(resets)))
        checked.add("MGAR")

        # GMLS oracle
        tot = 0.0
        for f in frames:
            g = f.players[0].goal
            best, bd = None, math.inf
            for pair in ref_buffer.pairs:
                dv = math.hypot(pair.ref_goal.move_vel.x - g["velocity"][0],
                                pair.ref_goal.move_vel.y - g["velocity"][1])
                dot = max(-1.0, min(1.0, pair.ref_goal.face_dir.x * g["facing"][0]
                                    + pair.ref_goal.face_dir.y * g["facing"][1]))
                dist = dv + math.acos(dot)
                if dist < bd:
                    best, bd = pair, dist
            tot += float(np.dot(best.ref_latent, np.asarray(f.players[0].latent)))
        worst = max(worst, abs(gmls(traj, ctx).value - tot / len(frames))); checked.add("GMLS")

        # trap bundle oracle over 4 short episodes
        trap_trajs = []
        for k in range(4):
            fr = []
            contact_tick = int(rng.integers(1, 5)) if rng.random() < 0.7 else None
            ground_tick = int(rng.integers(0, 6)) if rng.random() < 0.5 else None
            for t in range(8):
                ev = []
                if contact_tick == t:
                    ev.append(_contact(t, "torso"))
                    if rng.random() < 0.3:
                        ev.append(_contact(t, "handball_front"))
                if ground_tick == t:
                    z = SpatialVec(0, 0, 0)
                    ev.append(CollisionEvent(t, -1, "ground", z, z, z))
                fr.append(_mk_frame(rng, t, {"skill": "trap", "body_part": "torso"}, (), ev))
            trap_trajs.append(Trajectory({}, fr))
        reports = {r.name: r for r in tsr_hrts_rbspt(trap_trajs, ProtocolContext())}
        succ = hand = 0
        rb_tot, rb_n = 0.0, 0
        for tt in trap_trajs:
            ct = next((f.tick for f in tt.frames for e in f.events if e.player == 0), None)
            gt = next((f.tick for f in tt.frames for e in f.events
                       if e.player == -1 and e.part == "ground"), None)
            if ct is None or (gt is not None and gt < ct):
                continue
            succ += 1
            hand += any(e.part.startswith("handball") for f in tt.frames for e in f.events
                        if e.player == 0)
            idx = next(i for i, f in enumerate(tt.frames) if f.tick >= ct)
            post = tt.frames[idx + 1: idx + 6]
            if post:
                sval = np.mean([
                    f.ball.vel.sub(f.players[0].root_vel).norm() for f in post
                ])
                rb_tot += sval
                rb_n += 1
        worst = max(worst, abs(reports["TSR"].value - 100.0 * succ / 4)); checked.add("TSR")
        if succ:
            worst = max(worst, abs(reports["HRTS"].value - 100.0 * hand / succ))
            checked.add("HRTS")
        if rb_n:
            worst = max(worst, abs(reports["RBSPT"].value - rb_tot / rb_n)); checked.add("RBSPT")

        # kick bundle oracle
        kgoals, ktrajs = [], []
        for k in range(3):
            fr = []
            contact_tick = int(rng.integers(0, 3)) if rng.random() < 0.8 else None
            for t in range(8):
                ev = [_contact(t)] if contact_tick == t else []
                fr.append(_mk_frame(rng, t, {"skill": "kick", "velocity": [5, 0, 1]}, (), ev))
            ktrajs.append(Trajectory({}, fr))
            kgoals.append(KickGoal(SpatialVec(*rng.uniform(5, 20, 3))))
        reports = {r.name: r for r in kick_bundle(ktrajs, kgoals, ProtocolContext())}
        succ = 0
        kdd_tot = ksd_tot = 0.0
        kn = 0
        for tt, kg in zip(ktrajs, kgoals):
            ct = next((f.tick for f in tt.frames for e in f.events if e.player == 0), None)
            if ct is None:
                continue
            succ += 1
            idx = next(i for i, f in enumerate(tt.frames) if f.tick >= ct)
            window = tt.frames[idx: idx + 5]
            gn = kg.velocity.norm()
            ad = asp = 0.0
            m = 0
            for f in window:
                bn = f.ball.vel.norm()
                if bn < 1e-9:
                    continue
                c = max(-1.0, min(1.0, f.ball.vel.dot(kg.velocity) / (bn * gn)))
                ad += math.degrees(math.acos(c))
                asp += abs(bn - gn)
                m += 1
            if m:
                kdd_tot += ad / m
                ksd_tot += asp / m
                kn += 1
        worst = max(worst, abs(reports["KSR"].value - 100.0 * succ / 3)); checked.add("KSR")
        if kn:
            worst = max(worst, abs(reports["KDD"].value - kdd_tot / kn)); checked.add("KDD")
            worst = max(worst, abs(reports["KSD"].value - ksd_tot / kn)); checked.add("KSD")

        # transition bundle oracle
        dgoals, dtrajs = [], []
        for k in range(3):
            fr = []
            for t in range(12):
                ev = [_contact(t, "foot_L")] if t == int(rng.integers(2, 10)) else []
                fr.append(_mk_frame(rng, t, {"skill": "dribble", "velocity": [2, 0]}, (), ev))
            dtrajs.append(Trajectory({}, fr))
            dgoals.append(DribbleGoal(PlanarVec(*rng.uniform(-5, 5, 2))))
        reports = {r.name: r for r in dgar30_tadg(dtrajs, dgoals, ProtocolContext())}
        reports["TTK"] = ttk(dtrajs, ProtocolContext())
        ach = 0
        tadg_tot = 0.0
        ttk_tot, ttk_n = 0.0, 0
        for tt, dg in zip(dtrajs, dgoals):
            t0 = tt.frames[0].tick
            tol = 0.1 * dg.velocity.norm()
            for f in tt.frames:
                if math.hypot(f.ball.vel.x - dg.velocity.x, f.ball.vel.y - dg.velocity.y) <= tol:
                    ach += 1
                    tadg_tot += (f.tick - t0) / 30.0
                    break
            ft = next((f.tick for f in tt.frames for e in f.events
                       if e.player == 0 and e.part.startswith("foot")), None)
            if ft is not None:
                ttk_tot += (ft - t0) / 30.0
                ttk_n += 1
        worst = max(worst, abs(reports["DGAR30"].value - 100.0 * ach / 3)); checked.add("DGAR30")
        if ach:
            worst = max(worst, abs(reports["TADG"].value - tadg_tot / ach)); checked.add("TADG")
        if ttk_n:
            worst = max(worst, abs(reports["TTK"].value - ttk_tot / ttk_n)); checked.add("TTK")

    all15 = {"CBD", "FBD", "DGAR", "CS", "TSR", "HRTS", "RBSPT", "MGAR", "GMLS",
             "KSR", "KDD", "KSD", "DGAR30", "TADG", "TTK"}
    verdict("all 15 metrics match brute-force oracles on 50 synthetic trajectories (1e-9)",
            worst <= 1e-9 and checked >= all15,
            f"worst |err| {worst:.2e}, covered {len(checked & all15)}/15")


def test_metric_tolerance_monotonicity():
    rng = np.random.default_rng(6)
    frames, resets = [], []
    goal = None
    for t in range(400):
        if t % 10 == 0:
            sp = rng.uniform(1, 7)
            a = rng.uniform(0, 2 * math.pi)
            fa = rng.uniform(0, 2 * math.pi)
            goal = {"skill": "move", "velocity": [sp * math.cos(a), sp * math.sin(a)],
                    "facing": [math.cos(fa), math.sin(fa)]}
            resets.append(t)
        frames.append(_mk_frame(rng, t, goal))
    traj = Trajectory({}, frames)
    ok = True
    prev = -1.0
    for tol in (0.02, 0.05, 0.1, 0.3, 0.6, 1.2):
        v = dgar(traj, ProtocolContext(goal_resets=resets, dgar_tolerance=tol)).value
        ok = ok and v >= prev
        prev = v
    prev = -1.0
    for ang in (2.0, 10.0, 20.0, 60.0, 180.0):
        v = mgar(traj, ProtocolContext(goal_resets=resets, mgar_angle_tolerance_deg=ang,
                                       mgar_speed_tolerance=0.3)).value
        ok = ok and v >= prev
        prev = v
    verdict("goal-achievement rates monotone in their tolerance parameters", ok)


# ---------------------------------------------------------------------------
# 6. episode machinery: mixtures and termination
# ---------------------------------------------------------------------------

def test_episode_mixtures(buffers):
    rng = np.random.default_rng(7)
    n = 10_000
    trap_src = sum(
        init_episode("dribble", buffers, rng)[1].init_source == "trap" for _ in range(n)
    ) / n
    drib_src = sum(
        init_episode("kick", buffers, rng)[1].init_source == "dribble" for _ in range(n)
    ) / n
    lob = sum(
        init_episode("trap", buffers, rng, trap_stage=2)[1].pass_kind == "lob"
        for _ in range(n)
    ) / n
    guided = sum(rng.random() < 0.8 for _ in range(n)) / n  # DEGCL episode draw
    ok = (abs(trap_src - 0.5) <= 0.02 and abs(drib_src - 0.7) <= 0.02
          and abs(lob - 0.8) <= 0.02 and abs(guided - 0.8) <= 0.02)
    verdict("init mixtures at 0.50/0.70/0.80 within +-0.02 over 10,000 draws", ok,
            f"dribble {trap_src:.3f}, kick {drib_src:.3f}, trap lob {lob:.3f}, guided {guided:.3f}")


def test_episode_guided_fraction_via_trainer():
    cfg = TrainConfig(population=2, elites=1, iterations=80, episodes_per_candidate=125,
                      episode_seconds=1 / 30.0, seed=11, degcl_fraction=0.8)
    res = train("move", cfg, ref_buffer=build_ref_buffer())
    ok = abs(res.guided_fraction - 0.8) <= 0.02
    verdict("guided-episode fraction 0.80 within +-0.02 over 10,000 training episodes", ok,
            f"measured {res.guided_fraction:.3f} over {80 * 125} episodes")


def test_termination_rules():
    # dribble: ball 3.01 m away stops early
    world = World(BallState(SpatialVec(3.01, 0, 0.11), SpatialVec(0, 0, 0)), [rest_pose()])
    r1 = check_termination("dribble", world, 1, EpisodeContext("dribble"))
    # trap: handball-zone contact stops with the foul reason
    ctx = EpisodeContext("trap", pass_kind="lob")
    z = SpatialVec(0, 0, 0)
    update_context(ctx, 2, [CollisionEvent(2, 0, "handball_back", z, z, z)])
    world2 = World(BallState(SpatialVec(1, 0, 1.2), SpatialVec(0, 0, 0)), [rest_pose()])
    r2 = check_termination("trap", world2, 2, ctx)
    # kick: 3 s without contact times out
    r3 = check_termination("kick", world2, 90, EpisodeContext("kick"))
    ok = (r1.kind == "early_stop" and r1.reason == "ball_lost"
          and r2.kind == "early_stop" and r2.reason == "handball"
          and r3.kind == "timeout")
    verdict("termination rules fire on constructed cases (3.01 m, handball, 3 s)", ok)


# ---------------------------------------------------------------------------
# 7. determinism
# ---------------------------------------------------------------------------

def test_determinism_and_replay(tmp_path):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    for path in (a, b):
        rc = main(["simulate", "--scenario", "give-and-go", "--seed", "11",
                   "--record", str(path)])
        assert rc == 0
    identical = a.read_bytes() == b.read_bytes()

    rec = tmp_path / "proto.jsonl"
    live_csv = tmp_path / "live.csv"
    rc = main(["evaluate", "dribble-standard", "--seed", "4", "--scale", "0.01",
               "--report", str(live_csv), "--record", str(rec)])
    assert rc == 0
    replay_csv = tmp_path / "replay.csv"
    rc = main(["replay", str(rec), "--metrics", "--report", str(replay_csv)])
    assert rc == 0
    reproduced = live_csv.read_bytes() == replay_csv.read_bytes()
    verdict("same seed/config/commands give bitwise-identical trajectories; replay "
            "reproduces the metric reports", identical and reproduced)


# ---------------------------------------------------------------------------
# 8. training smoke
# ---------------------------------------------------------------------------

def test_training_smoke_move():
    t0 = time.time()
    cfg = TrainConfig(population=16, elites=4, iterations=30, episodes_per_candidate=2,
                      episode_seconds=4.0, seed=2024)
    res = train("move", cfg, ref_buffer=build_ref_buffer())
    elapsed = time.time() - t0
    best = [row["best_so_far"] for row in res.log]
    monotone = all(b2 >= b1 for b1, b2 in zip(best, best[1:]))
    final_mean = res.log[-1]["mean"]
    improvement = (final_mean - res.baseline_fitness) / abs(res.baseline_fitness)
    ok = monotone and improvement >= 0.20 and elapsed < 300.0
    verdict("CEM move training (pop 16, 30 iters) improves mean return >= 20%, "
            "best-so-far monotone", ok,
            f"baseline {res.baseline_fitness:.1f} -> {final_mean:.1f} "
            f"(+{100 * improvement:.0f}%), {elapsed:.0f}s")


# ---------------------------------------------------------------------------
# 9. STI directional claim (trap-to-dribble)
# ---------------------------------------------------------------------------

def test_sti_directional(codec, sim_cfg, analytic, buffers):
    # both arms share the training procedure, budget, and seeds; they differ
    # only in the episode-initialization distribution (snapshot buffers vs
    # standing starts), mirroring the compared conditions
    t0 = time.time()
    sti_policy = clone_policy("dribble", analytic["dribble"], np.random.default_rng(42),
                              hidden=48, episodes=200, episode_ticks=120,
                              buffers=buffers, sti_enabled=True,
                              sim_cfg=sim_cfg, codec=codec)
    nosti_policy = clone_policy("dribble", analytic["dribble"], np.random.default_rng(42),
                                hidden=48, episodes=200, episode_ticks=120,
                                sti_enabled=False, sim_cfg=sim_cfg, codec=codec)

    results = {}
    for tag, pol in (("sti", sti_policy), ("nosti", nosti_policy)):
        reports, _ = run_protocol(
            "trap-to-dribble", {"trap": analytic["trap"], "dribble": pol},
            seed=99, scale=0.1, sim_cfg=sim_cfg, codec=codec,
        )
        by = {r.name: r for r in reports}
        n_total = by["DGAR30"].sample_count
        achieved = by["TADG"].sample_count if by["TADG"].defined else 0
        tadg = by["TADG"].value if by["TADG"].defined else 0.0
        censored = (tadg * achieved + (n_total - achieved) * 30.0) / n_total
        results[tag] = (achieved, n_total, tadg if achieved else None, censored)
    (a1, n1, t1, c1), (a2, n2, t2, c2) = results["sti"], results["nosti"]
    ok = c1 < c2
    verdict("snapshot-initialized dribble training beats standing-start training on "
            "trap-to-dribble transitions (horizon-censored mean time-to-goal)",
            ok,
            f"sti {a1}/{n1} achieved, censored mean {c1:.2f}s vs "
            f"no-sti {a2}/{n2}, {c2:.2f}s; {time.time() - t0:.0f}s")


# ---------------------------------------------------------------------------
# 10. scenario smoke
# ---------------------------------------------------------------------------

def test_scenario_smoke():
    failures = []
    for seed in range(20):
        sc = make_scenario("give-and-go", seed, record=False)
        sc.run()
        if not sc.completed():
            failures.append(seed)
    t0 = time.time()
    sc = make_scenario("match", 3, record=False)
    state = sc.run()
    wall = time.time() - t0
    sim_seconds = state.world.tick / 30.0
    ok = not failures and sim_seconds >= 60.0 and wall < sim_seconds
    verdict("give-and-go completes on 20 seeds; 3v3 runs 60 s faster than realtime",
            ok, f"failures {failures}, 3v3 {sim_seconds:.0f}s in {wall:.1f}s wall")
