"""Interactive scenario logic: pass solvers, teammate/opponent AI, formations,
player switching, and the scripted orchestrations used by the batch CLI.

All characters run the same skill FSM; the controlled player takes external
(or scripted) commands while AI players derive goals from the game state.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import (
    BallState,
    CharacterState,
    PlanarVec,
    SpatialVec,
    horizontal_distance,
    rest_pose,
)
from .episodes import DribbleGoal, KickGoal, MoveGoal, TrapGoal
from .fsm import CommandSet, FsmState, PlayerFsm, TransitionRecord
from .motion import LatentCodec
from .sim import SimConfig, World, control_step
from .skills import AnalyticPolicy
from .trajectory import Frame, PlayerFrame

FIELD_LENGTH = 105.0
FIELD_WIDTH = 68.0
CHASE_LEAD_GAIN = 0.3  # s of ball-velocity lead on the intercept point
MAX_SPEED = 7.0


class PassSolverError(ValueError):
    pass


@dataclass(slots=True)
class PassRequest:
    kind: str  # "lob" | "ground"
    launch: SpatialVec
    landing: PlanarVec
    phi: float = math.radians(20.0)  # lob only; ground uses ~3 degrees

    def __post_init__(self):
        if self.kind not in ("lob", "ground"):
            raise PassSolverError(f"unknown pass kind {self.kind!r}")
        if self.kind == "lob" and not math.radians(0.45) <= self.phi <= math.radians(45.0):
            raise PassSolverError("lob launch angle outside (0.45, 45] degrees")


GROUND_PASS_ELEVATION = math.radians(3.0)


def solve_pass(req: PassRequest, g: float = 9.8) -> SpatialVec:
    """Initial velocity for a pass toward the requested landing point.

    Lob: inverts the range relation v0^2 = d g / sin(2 phi) so the drag-free
    flight lands on target.  Ground: keeps the lob solution's horizontal
    components and flattens the vertical component to a ~3 degree launch.
    """
    dx = req.landing.x - req.launch.x
    dy = req.landing.y - req.launch.y
    d = math.hypot(dx, dy)
    if d < 1e-9:
        raise PassSolverError("pass landing coincides with the launch point")
    ux, uy = dx / d, dy / d
    v0 = math.sqrt(d * g / math.sin(2.0 * req.phi))
    vh = v0 * math.cos(req.phi)
    if req.kind == "lob":
        return SpatialVec(vh * ux, vh * uy, v0 * math.sin(req.phi))
    return SpatialVec(vh * ux, vh * uy, vh * math.tan(GROUND_PASS_ELEVATION))


def opponent_chase_goal(world: World, me: int, controlled: int) -> MoveGoal:
    """Chase the ball with a speed-proportional lead; fall back to shadowing
    the controlled player when far from the ball."""
    char = world.players[me]
    ball = world.ball
    bh = ball.vel.horizontal()
    speed = bh.norm()
    lead = bh.scaled(CHASE_LEAD_GAIN) if speed > 1e-9 else PlanarVec(0.0, 0.0)
    target = PlanarVec(ball.pos.x + lead.x, ball.pos.y + lead.y)
    if horizontal_distance(ball.pos, char.root_pos) > 10.0:
        tgt_char = world.players[controlled]
        target = PlanarVec(tgt_char.root_pos.x, tgt_char.root_pos.y)
    dx = target.x - char.root_pos.x
    dy = target.y - char.root_pos.y
    dist = math.hypot(dx, dy)
    vel = PlanarVec(dx / dist * MAX_SPEED, dy / dist * MAX_SPEED) if dist > 1e-6 \
        else PlanarVec(0.0, 0.0)
    fx = ball.pos.x - char.root_pos.x
    fy = ball.pos.y - char.root_pos.y
    fn = math.hypot(fx, fy)
    face = PlanarVec(fx / fn, fy / fn) if fn > 1e-6 else char.facing
    return MoveGoal(vel, face)


@dataclass
class FormationSpec:
    """Role anchors plus the ball-position shift rule."""

    shape: str = "4-3-1-2"
    anchors: list[PlanarVec] = field(default_factory=list)
    shift_gain: float = 0.3  # fraction of the ball's distance from halfway
    defending_sign: float = -1.0  # which x-direction this team defends

    @classmethod
    def default(cls, n: int, defending_sign: float) -> "FormationSpec":
        anchors = formation_anchors(n)
        return cls(anchors=[PlanarVec(a.x * -defending_sign, a.y) for a in anchors],
                   defending_sign=defending_sign)


def formation_anchors(n: int) -> list[PlanarVec]:
    """Anchor layout on the defending half (x < 0), goalkeeper first.

    Eleven players fill the 4-3-1-2 rows; smaller sides take the first n
    slots of the same ordering.
    """
    rows = [
        (-48.0, [0.0]),  # goalkeeper
        (-35.0, [-22.0, -8.0, 8.0, 22.0]),  # back four
        (-20.0, [-15.0, 0.0, 15.0]),  # midfield three
        (-10.0, [0.0]),  # playmaker
        (-2.0, [-8.0, 8.0]),  # front two
    ]
    out = []
    for x, ys in rows:
        for y in ys:
            out.append(PlanarVec(x, y))
    return out[:n]


def formation_targets(spec: FormationSpec, ball: BallState) -> list[PlanarVec]:
    """Anchors shifted along the field length by the ball's signed distance
    from halfway, toward the defending goal (linear, symmetric)."""
    shift = spec.shift_gain * ball.pos.x
    return [PlanarVec(a.x + shift, a.y) for a in spec.anchors]


def assign_chaser(world: World, team: list[int], targets: list[PlanarVec]) -> int:
    """Exactly one chaser: prefer players near both the ball and their anchor,
    else the closest to the ball."""
    ball = world.ball
    best = None
    for idx, pid in enumerate(team):
        char = world.players[pid]
        near_ball = horizontal_distance(ball.pos, char.root_pos) <= 10.0
        tgt = targets[idx]
        near_anchor = math.hypot(char.root_pos.x - tgt.x, char.root_pos.y - tgt.y) <= 15.0
        if near_ball and near_anchor:
            d = horizontal_distance(ball.pos, char.root_pos)
            if best is None or d < best[0]:
                best = (d, pid)
    if best is not None:
        return best[1]
    dists = [(horizontal_distance(ball.pos, world.players[pid].root_pos), pid) for pid in team]
    return min(dists)[1]


def switch_control(
    world: World,
    team: list[int],
    controlled: int,
    fsm_states: dict[int, FsmState],
    cycle_pressed: bool = False,
    closest_pressed: bool = False,
    pass_target: int | None = None,
) -> int:
    """Controlled-player selection: pass target on release, auto-switch to the
    ball-handler, manual cycle, or closest-to-ball."""
    if pass_target is not None:
        return pass_target
    if closest_pressed:
        dists = [(horizontal_distance(world.ball.pos, world.players[p].root_pos), p) for p in team]
        return min(dists)[1]
    handlers = [p for p in team if fsm_states.get(p) in (FsmState.DRIBBLE, FsmState.TRAP)]
    if handlers:
        if controlled in handlers:
            return controlled
        dists = [(horizontal_distance(world.ball.pos, world.players[p].root_pos), p) for p in handlers]
        return min(dists)[1]
    if cycle_pressed:
        i = team.index(controlled)
        return team[(i + 1) % len(team)]
    return controlled


# ---------------------------------------------------------------------------
# scenario orchestration
# ---------------------------------------------------------------------------

@dataclass
class PlayerSlot:
    fsm: PlayerFsm
    team: int  # 0 = user team, 1 = opponents
    goal: object = None


@dataclass
class UserInput:
    """Mapped device state for the controlled player (one control tick).

    Axis pairs are unit-clamped; triggers in [0, 1]; buttons are edges.
    """

    move: tuple[float, float] = (0.0, 0.0)
    face: tuple[float, float] = (0.0, 0.0)
    lt: float = 0.0  # kick start (dribble) / lob angle (kick)
    rt: float = 0.0  # target kick speed
    trap_start: bool = False
    trap_end: bool = False
    kick_start: bool = False
    kick_end: bool = False
    switch: int = 0  # 1 = cycle, 2 = closest-to-ball

    def commands(self) -> CommandSet:
        return CommandSet(
            trap_start=self.trap_start,
            trap_end=self.trap_end,
            kick_start=self.kick_start or self.lt > 0.5,
            kick_end=self.kick_end,
        )


def goal_from_input(inp: UserInput, char: CharacterState, fsm_state: FsmState):
    """Translate mapped inputs into the active skill's goal."""
    mx, my = inp.move
    mag = min(math.hypot(mx, my), 1.0)
    if mag > 1e-6:
        vel = PlanarVec(mx / math.hypot(mx, my) * mag * MAX_SPEED,
                        my / math.hypot(mx, my) * mag * MAX_SPEED)
    else:
        vel = PlanarVec(0.0, 0.0)
    fx, fy = inp.face
    fn = math.hypot(fx, fy)
    face = PlanarVec(fx / fn, fy / fn) if fn > 0.2 else char.facing
    if fsm_state is FsmState.MOVE:
        return MoveGoal(vel, face)
    if fsm_state is FsmState.DRIBBLE:
        return DribbleGoal(vel)
    if fsm_state is FsmState.TRAP:
        return TrapGoal("foot_R")
    # kick: right stick aims, right trigger sets speed, left trigger the loft
    speed = 5.0 + min(max(inp.rt, 0.0), 1.0) * 30.0
    elev = math.radians(0.45 + min(max(inp.lt, 0.0), 1.0) * 44.55)
    ce = math.cos(elev)
    return KickGoal(SpatialVec(face.x * speed * ce, face.y * speed * ce,
                               speed * math.sin(elev)))


@dataclass
class ScenarioState:
    world: World
    slots: list[PlayerSlot]
    controlled: int
    tick_limit: int
    transitions: list[TransitionRecord] = field(default_factory=list)
    frames: list[Frame] = field(default_factory=list)
    milestones: dict = field(default_factory=dict)
    phase: str = "start"


class Scenario:
    """Base: shared per-tick loop; subclasses provide setup and per-tick goals."""

    id = "base"

    def __init__(self, seed: int, sim_cfg: SimConfig | None = None, record: bool = True):
        self.seed = seed
        self.rng = np.random.default_rng(seed)
        self.sim_cfg = sim_cfg or SimConfig(seed=seed)
        self.codec = LatentCodec()
        self.policies = {
            s: AnalyticPolicy(s, self.codec, self.sim_cfg)
            for s in ("move", "trap", "dribble", "kick")
        }
        self.record = record
        self.state: ScenarioState | None = None
        self.user_input: UserInput | None = None  # overrides the controlled player

    def setup(self) -> ScenarioState:
        raise NotImplementedError

    def commands_for(self, state: ScenarioState, pid: int) -> CommandSet:
        return CommandSet()

    def goal_for(self, state: ScenarioState, pid: int, fsm_state: FsmState):
        raise NotImplementedError

    def post_tick(self, state: ScenarioState) -> None:
        pass

    def run(self, external_commands=None) -> ScenarioState:
        state = self.state or self.setup()
        self.state = state
        while state.world.tick < state.tick_limit:
            self.tick(state, external_commands)
            if state.phase == "done":
                break
        return state

    def tick(self, state: ScenarioState, external_commands=None) -> None:
        world = state.world
        events = world.events
        user = self.user_input
        if user is not None and user.switch:
            home = [i for i, s in enumerate(state.slots) if s.team == 0]
            state.controlled = switch_control(
                world, home, state.controlled,
                {p: state.slots[p].fsm.state for p in home},
                cycle_pressed=user.switch == 1,
                closest_pressed=user.switch == 2,
            )
        for pid, slot in enumerate(state.slots):
            cmds = self.commands_for(state, pid)
            if pid == state.controlled:
                if user is not None:
                    cmds = user.commands()
                elif external_commands is not None:
                    cmds = external_commands(state)
            slot.fsm.push_commands(cmds)
            rec = slot.fsm.tick(world, pid, events)
            if rec is not None:
                state.transitions.append(rec)
        latents = []
        for pid, slot in enumerate(state.slots):
            if pid == state.controlled and user is not None:
                goal = goal_from_input(user, world.players[pid], slot.fsm.state)
            else:
                goal = self.goal_for(state, pid, slot.fsm.state)
            slot.goal = goal
            policy = self.policies[slot.fsm.state.value]
            latents.append(policy.act(world.players[pid], world.ball, goal))
        params = [self.codec.decode(z) for z in latents]
        step_events = control_step(world, self.sim_cfg, params)
        if self.record:
            players = [
                PlayerFrame.capture(
                    world.players[pid],
                    state.slots[pid].fsm.state.value,
                    state.slots[pid].goal.to_json() if state.slots[pid].goal else {},
                    latents[pid],
                    {},
                )
                for pid in range(len(state.slots))
            ]
            state.frames.append(Frame(world.tick // self.sim_cfg.control_divisor,
                                      world.ball.copy(), players, list(step_events)))
        self.post_tick(state)


def _move_towards(char: CharacterState, target: PlanarVec, speed: float,
                  face_at: PlanarVec | None = None) -> MoveGoal:
    dx, dy = target.x - char.root_pos.x, target.y - char.root_pos.y
    dist = math.hypot(dx, dy)
    vel = PlanarVec(dx / dist * speed, dy / dist * speed) if dist > 0.05 else PlanarVec(0, 0)
    if face_at is not None:
        fx, fy = face_at.x - char.root_pos.x, face_at.y - char.root_pos.y
        fn = math.hypot(fx, fy)
        face = PlanarVec(fx / fn, fy / fn) if fn > 1e-6 else char.facing
    else:
        face = vel.scaled(1.0 / max(vel.norm(), 1e-6)) if vel.norm() > 0.05 else char.facing
    return MoveGoal(vel, face)


class GiveAndGo(Scenario):
    """Controlled player passes to the runner, sprints forward, receives the
    return ground pass one meter ahead, then shoots.

    Milestones recorded: first_pass, teammate_possession, return_pass, shot.
    """

    id = "give-and-go"

    TEAMMATE_RUN_SPEED = 3.5
    GOAL_LINE_X = 40.0

    def setup(self) -> ScenarioState:
        j = lambda s: float(self.rng.uniform(-s, s))
        self.defender_zones = [
            PlanarVec(38.0 + j(1.5), -4.0 + j(1.5)),
            PlanarVec(38.0 + j(1.5), 6.0 + j(1.5)),
        ]
        chars = [
            rest_pose(j(1.0), j(1.0)),
            rest_pose(2.0 + j(1.0), 12.0 + j(1.5)),
            rest_pose(self.defender_zones[0].x, self.defender_zones[0].y, PlanarVec(-1.0, 0.0)),
            rest_pose(self.defender_zones[1].x, self.defender_zones[1].y, PlanarVec(-1.0, 0.0)),
        ]
        ball = BallState(
            SpatialVec(chars[0].root_pos.x + 0.6, chars[0].root_pos.y, 0.11),
            SpatialVec(0.0, 0.0, 0.0),
        )
        world = World(ball, chars)
        slots = [PlayerSlot(PlayerFsm(), 0), PlayerSlot(PlayerFsm(), 0),
                 PlayerSlot(PlayerFsm(), 1), PlayerSlot(PlayerFsm(), 1)]
        state = ScenarioState(world, slots, controlled=0, tick_limit=70 * 30)
        state.phase = "advance"
        return state

    def commands_for(self, state: ScenarioState, pid: int) -> CommandSet:
        world = state.world
        char = world.players[pid]
        ball = world.ball
        if pid == 1:
            # runner traps the incoming first pass
            if state.phase in ("first_pass", "teammate_carry") and \
                    horizontal_distance(ball.pos, char.root_pos) < 6.0 and ball.pos.z > 0.2:
                return CommandSet(trap_start=True)
            return CommandSet()
        if pid != state.controlled:
            return CommandSet()
        fsm = state.slots[pid].fsm.state
        settled = horizontal_distance(ball.pos, char.root_pos) < 0.9
        if state.phase == "advance" and fsm is FsmState.DRIBBLE and settled:
            # kick off the give: lob to the runner
            return CommandSet(kick_start=True)
        if state.phase == "return_pass" and fsm is FsmState.MOVE and \
                horizontal_distance(ball.pos, char.root_pos) < 7.0:
            return CommandSet(trap_start=True)  # collect a hot return ball
        if state.phase == "receive" and fsm is FsmState.DRIBBLE and settled:
            return CommandSet(kick_start=True)
        return CommandSet()

    def goal_for(self, state: ScenarioState, pid: int, fsm_state: FsmState):
        world = state.world
        char = world.players[pid]
        ball = world.ball
        mate = world.players[1 - pid] if pid in (0, 1) else None
        if pid == 0:
            if fsm_state is FsmState.KICK:
                if state.phase in ("advance", "first_pass"):
                    req = PassRequest(
                        "lob",
                        ball.pos,
                        PlanarVec(mate.root_pos.x, mate.root_pos.y),
                        phi=math.radians(24.0),
                    )
                    return KickGoal(solve_pass(req, self.sim_cfg.gravity))
                # shot on goal
                req = PassRequest("ground", ball.pos, PlanarVec(self.GOAL_LINE_X + 4.0, 0.0))
                return KickGoal(solve_pass(req, self.sim_cfg.gravity))
            if fsm_state is FsmState.DRIBBLE:
                if state.phase in ("receive", "shoot"):
                    return DribbleGoal(PlanarVec(2.5, 0.0))
                return DribbleGoal(PlanarVec(2.0, 0.0))
            if fsm_state is FsmState.TRAP:
                return TrapGoal("foot_R")
            # sprint up the pitch while the give runs, then meet the return
            if state.phase in ("first_pass", "teammate_carry"):
                return _move_towards(char, PlanarVec(char.root_pos.x + 10.0, 0.0), 5.5,
                                     face_at=PlanarVec(ball.pos.x, ball.pos.y))
            return _move_towards(char, PlanarVec(ball.pos.x, ball.pos.y), 5.0)
        if pid == 1:
            if fsm_state is FsmState.KICK:
                lead = PlanarVec(
                    world.players[0].root_pos.x + world.players[0].facing.x * 1.0,
                    world.players[0].root_pos.y + world.players[0].facing.y * 1.0,
                )
                req = PassRequest("ground", ball.pos, lead, phi=math.radians(30.0))
                return KickGoal(solve_pass(req, self.sim_cfg.gravity))
            if fsm_state is FsmState.TRAP:
                return TrapGoal("foot_R")
            if fsm_state is FsmState.DRIBBLE:
                clamp = min(max(2.0, 0.5 * (self.GOAL_LINE_X - char.root_pos.x)), 3.0)
                return DribbleGoal(PlanarVec(clamp, 0.0))
            if state.phase in ("advance", "first_pass"):
                # run the channel, but collect a pass that dies en route
                loose = ball.pos.z < 0.4 and ball.vel.horizontal().norm() < 4.0
                if state.phase == "first_pass" and loose:
                    return _move_towards(char, PlanarVec(ball.pos.x, ball.pos.y), 5.5)
                return _move_towards(char, PlanarVec(self.GOAL_LINE_X, char.root_pos.y),
                                     self.TEAMMATE_RUN_SPEED,
                                     face_at=PlanarVec(ball.pos.x, ball.pos.y))
            if state.phase == "teammate_carry" or (
                state.phase == "return_pass"
                and "return_pass" not in state.milestones
            ):
                d_mate = horizontal_distance(ball.pos, char.root_pos)
                d_user = horizontal_distance(ball.pos, world.players[0].root_pos)
                if d_mate < d_user:
                    return _move_towards(char, PlanarVec(ball.pos.x, ball.pos.y), 4.5)
            # otherwise hold the lane and watch the ball
            return _move_towards(char, PlanarVec(char.root_pos.x, char.root_pos.y), 0.0,
                                 face_at=PlanarVec(ball.pos.x, ball.pos.y))
        # defenders: zonal back line, pressing only inside a small bubble
        if fsm_state is FsmState.DRIBBLE:
            return DribbleGoal(PlanarVec(-4.0, 0.0))  # clear it upfield-away
        if fsm_state is FsmState.KICK:
            req = PassRequest("ground", ball.pos, PlanarVec(char.root_pos.x - 25.0, 0.0))
            return KickGoal(solve_pass(req, self.sim_cfg.gravity))
        if fsm_state is FsmState.TRAP:
            return TrapGoal("foot_R")
        zone = self.defender_zones[pid - 2]
        if horizontal_distance(ball.pos, char.root_pos) < 3.5:
            return opponent_chase_goal(world, pid, state.controlled)
        return _move_towards(char, zone, 4.0, face_at=PlanarVec(ball.pos.x, ball.pos.y))

    def commands_after_kick(self, state):
        pass

    def post_tick(self, state: ScenarioState) -> None:
        world = state.world
        slots = state.slots
        # cancel kicks that fail to connect within three seconds
        for pid, slot in enumerate(slots):
            if slot.fsm.state is FsmState.KICK:
                since = state.milestones.setdefault(f"_kick_since_{pid}", world.tick)
                if world.tick - since > 90:
                    slot.fsm.push_commands(CommandSet(kick_end=True))
                    state.milestones.pop(f"_kick_since_{pid}", None)
            else:
                state.milestones.pop(f"_kick_since_{pid}", None)
        # milestone detection drives the script phases
        if state.phase == "advance" and slots[0].fsm.state is FsmState.KICK:
            state.phase = "first_pass"
        if state.phase == "first_pass":
            if any(e.player == 0 for e in world.events):
                state.milestones["first_pass"] = world.tick
            if slots[1].fsm.state in (FsmState.TRAP, FsmState.DRIBBLE) and \
                    horizontal_distance(world.ball.pos, world.players[1].root_pos) < 2.5:
                state.milestones.setdefault("teammate_possession", world.tick)
                state.phase = "teammate_carry"
            if slots[0].fsm.state is FsmState.DRIBBLE and \
                    "first_pass" in state.milestones and \
                    world.tick - state.milestones["first_pass"] > 120:
                state.phase = "advance"  # recovered own overhit pass: go again
        if state.phase == "teammate_carry":
            # release the return pass once the controlled player is upfield and
            # the ball sits at the teammate's feet (or the carry drags on)
            since = state.milestones.setdefault("_carry_since", world.tick)
            overdue = world.tick - since > 240
            if slots[1].fsm.state is FsmState.DRIBBLE and \
                    (overdue or (
                        world.players[0].root_pos.x > world.players[1].root_pos.x - 6.0
                        and horizontal_distance(world.ball.pos, world.players[1].root_pos) < 1.1
                    )):
                slots[1].fsm.push_commands(CommandSet(kick_start=True))
            if slots[1].fsm.state is FsmState.KICK:
                state.milestones.pop("_carry_since", None)
                state.phase = "return_pass"
        if state.phase == "return_pass":
            if any(e.player == 1 for e in world.events):
                state.milestones.setdefault("return_pass", world.tick)
            if slots[1].fsm.state is FsmState.DRIBBLE:
                state.phase = "teammate_carry"  # teammate still on the ball: go again
            if slots[0].fsm.state in (FsmState.DRIBBLE, FsmState.TRAP) and \
                    "return_pass" in state.milestones:
                state.phase = "receive"
                state.milestones.setdefault("controlled_receives", world.tick)
        if state.phase == "receive" and slots[0].fsm.state is FsmState.KICK:
            state.phase = "shoot"
        if state.phase == "shoot":
            if any(e.player == 0 for e in world.events):
                state.milestones["shot"] = world.tick
                state.phase = "done"
            elif slots[0].fsm.state is FsmState.DRIBBLE:
                state.phase = "receive"  # shot whiffed: line it up again

    def completed(self) -> bool:
        m = self.state.milestones if self.state else {}
        return {"first_pass", "teammate_possession", "return_pass", "shot"} <= set(m)


class CompetitiveTrap(Scenario):
    """Two players compete for lobbed balls: trap, dribble toward the other's
    goal, shoot inside 15 m; fresh balls launch at fixed intervals."""

    id = "competitive-trap"

    RELAUNCH_TICKS = 8 * 30
    SHOOT_RANGE = 15.0

    def setup(self) -> ScenarioState:
        chars = [rest_pose(-6.0, 0.0), rest_pose(6.0, 0.0, PlanarVec(-1.0, 0.0))]
        ball = BallState(SpatialVec(0.0, 0.0, 8.0), SpatialVec(0.0, 0.0, 0.0))
        world = World(ball, chars)
        slots = [PlayerSlot(PlayerFsm(), 0), PlayerSlot(PlayerFsm(), 1)]
        state = ScenarioState(world, slots, controlled=0, tick_limit=60 * 30)
        state.milestones["launches"] = 0
        return state

    def goals_x(self, team: int) -> float:
        return 45.0 if team == 0 else -45.0

    def commands_for(self, state: ScenarioState, pid: int) -> CommandSet:
        world = state.world
        char = world.players[pid]
        slot = state.slots[pid]
        ball = world.ball
        if slot.fsm.state is FsmState.MOVE and ball.pos.z > 0.5 and \
                horizontal_distance(ball.pos, char.root_pos) < 8.0:
            return CommandSet(trap_start=True)
        if slot.fsm.state is FsmState.DRIBBLE and \
                abs(self.goals_x(slot.team) - char.root_pos.x) < self.SHOOT_RANGE:
            return CommandSet(kick_start=True)
        return CommandSet()

    def goal_for(self, state: ScenarioState, pid: int, fsm_state: FsmState):
        world = state.world
        char = world.players[pid]
        slot = state.slots[pid]
        if fsm_state is FsmState.TRAP:
            parts = ("torso", "lower_leg_L", "lower_leg_R", "foot_L", "foot_R")
            return TrapGoal(parts[int(self.rng.integers(len(parts)))]) if slot.goal is None \
                or not isinstance(slot.goal, TrapGoal) else slot.goal
        if fsm_state is FsmState.DRIBBLE:
            gx = self.goals_x(slot.team)
            dx = gx - char.root_pos.x
            dist = abs(dx)
            dirx = 1.0 if dx > 0 else -1.0
            return DribbleGoal(PlanarVec(dirx * MAX_SPEED, 0.0))
        if fsm_state is FsmState.KICK:
            gx = self.goals_x(slot.team)
            req = PassRequest("ground", world.ball.pos, PlanarVec(gx, 0.0))
            return KickGoal(solve_pass(req, self.sim_cfg.gravity))
        other = world.players[1 - pid]
        return opponent_chase_goal(world, pid, 1 - pid)

    def post_tick(self, state: ScenarioState) -> None:
        world = state.world
        if world.tick % self.RELAUNCH_TICKS == 0:
            # fresh contested lob between the players
            mx = 0.5 * (world.players[0].root_pos.x + world.players[1].root_pos.x)
            my = 0.5 * (world.players[0].root_pos.y + world.players[1].root_pos.y)
            ang = self.rng.uniform(0.0, 2.0 * math.pi)
            world.ball.pos = SpatialVec(mx + 14.0 * math.cos(ang), my + 14.0 * math.sin(ang), 0.11)
            v0 = self.rng.uniform(12.0, 18.0)
            phi = self.rng.uniform(math.radians(25.0), math.radians(40.0))
            dx, dy = mx - world.ball.pos.x, my - world.ball.pos.y
            dd = math.hypot(dx, dy)
            vh = v0 * math.cos(phi)
            world.ball.vel = SpatialVec(vh * dx / dd, vh * dy / dd, v0 * math.sin(phi))
            state.milestones["launches"] += 1
            for slot in state.slots:
                slot.fsm.push_commands(CommandSet(trap_start=True))


class Match(Scenario):
    """NvN match with formation-held AI and user-team player switching."""

    id = "match"

    def __init__(self, seed: int, sim_cfg=None, record=True, team_size: int = 3):
        super().__init__(seed, sim_cfg, record)
        self.team_size = team_size

    def setup(self) -> ScenarioState:
        n = self.team_size
        home = FormationSpec.default(n, defending_sign=-1.0)
        away = FormationSpec.default(n, defending_sign=1.0)
        self.formations = (home, away)
        chars = []
        for spec in (home, away):
            for a in spec.anchors:
                facing = PlanarVec(1.0, 0.0) if spec is home else PlanarVec(-1.0, 0.0)
                chars.append(rest_pose(a.x, a.y, facing))
        ball = BallState(SpatialVec(0.0, 0.0, 0.11), SpatialVec(0.0, 0.0, 0.0))
        world = World(ball, chars)
        slots = [PlayerSlot(PlayerFsm(), 0) for _ in range(n)] + \
                [PlayerSlot(PlayerFsm(), 1) for _ in range(n)]
        state = ScenarioState(world, slots, controlled=0, tick_limit=60 * 30)
        return state

    def teams(self) -> tuple[list[int], list[int]]:
        n = self.team_size
        return list(range(n)), list(range(n, 2 * n))

    def goal_for(self, state: ScenarioState, pid: int, fsm_state: FsmState):
        world = state.world
        char = world.players[pid]
        home, away = self.teams()
        team = 0 if pid in home else 1
        spec = self.formations[team]
        members = home if team == 0 else away
        targets = formation_targets(spec, world.ball)
        me_idx = members.index(pid)
        if fsm_state is FsmState.DRIBBLE:
            gx = 52.5 if team == 0 else -52.5
            dx = gx - char.root_pos.x
            return DribbleGoal(PlanarVec(math.copysign(min(5.0, abs(dx)), dx), 0.0))
        if fsm_state is FsmState.KICK:
            gx = 52.5 if team == 0 else -52.5
            req = PassRequest("ground", world.ball.pos, PlanarVec(gx, 0.0))
            return KickGoal(solve_pass(req, self.sim_cfg.gravity))
        if fsm_state is FsmState.TRAP:
            return TrapGoal("foot_R")
        chaser = assign_chaser(world, members, targets)
        if pid == chaser:
            return opponent_chase_goal(world, pid, state.controlled)
        goal = _move_towards(char, targets[me_idx], 4.0)
        if team == 0:
            # user teammates watch the ball; AI keeps facing along its run
            bx = world.ball.pos.x - char.root_pos.x
            by = world.ball.pos.y - char.root_pos.y
            bn = math.hypot(bx, by)
            if bn > 1e-6:
                goal = MoveGoal(goal.velocity, PlanarVec(bx / bn, by / bn))
        return goal

    def post_tick(self, state: ScenarioState) -> None:
        home, _ = self.teams()
        fsm_states = {p: state.slots[p].fsm.state for p in home}
        state.controlled = switch_control(
            state.world, home, state.controlled, fsm_states
        )


SCENARIOS = {
    "give-and-go": GiveAndGo,
    "competitive-trap": CompetitiveTrap,
    "match": Match,
    "3v3": Match,
}


def make_scenario(scenario_id: str, seed: int, sim_cfg=None, record=True,
                  team_size: int = 3) -> Scenario:
    if scenario_id not in SCENARIOS:
        raise ValueError(f"unknown scenario {scenario_id!r}")
    cls = SCENARIOS[scenario_id]
    if cls is Match:
        return Match(seed, sim_cfg, record, team_size=team_size)
    return cls(seed, sim_cfg, record)


def load_scenario_config(path) -> dict:
    """Structured scenario definition: id, seed, team sizes, formation
    anchors/gain, chase lead; unspecified fields keep their defaults."""
    import json
    from pathlib import Path

    raw = json.loads(Path(path).read_text())
    if "scenario" not in raw:
        raise ValueError("scenario config must name a 'scenario' id")
    if raw["scenario"] not in SCENARIOS:
        raise ValueError(f"unknown scenario {raw['scenario']!r}")
    return raw


def scenario_from_config(cfg: dict, sim_cfg=None, record=True) -> Scenario:
    scenario = make_scenario(
        cfg["scenario"], int(cfg.get("seed", 0)), sim_cfg, record,
        team_size=int(cfg.get("team_size", 3)),
    )
    if isinstance(scenario, Match):
        gain = cfg.get("formation", {}).get("shift_gain")
        anchors = cfg.get("formation", {}).get("anchors")
        if gain is not None or anchors is not None:
            state = scenario.setup()
            scenario.state = state
            for spec in scenario.formations:
                if gain is not None:
                    spec.shift_gain = float(gain)
                if anchors is not None:
                    signed = [PlanarVec(a[0] * -spec.defending_sign, a[1]) for a in anchors]
                    spec.anchors = signed[: len(spec.anchors)]
    return scenario
