"""Four-state skill FSM: Move, Trap, Dribble, Kick.

Transitions fire from user command edges and world predicates; physical
events (collision, distance) outrank command-triggered rules within a tick,
and at most one transition fires per control tick.  Command edges stay
latched for up to 10 control ticks while awaiting their predicate.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import Enum
from itertools import product

from .core import BallState, CharacterState, approaching, horizontal_distance
from .sim import CollisionEvent, World

DRIBBLE_RANGE = 2.0  # m; entry inclusive, exit strict
COMMAND_TTL = 10  # control ticks a latched command stays pending


class FsmState(str, Enum):
    MOVE = "move"
    TRAP = "trap"
    DRIBBLE = "dribble"
    KICK = "kick"


STATE_COLORS = {
    FsmState.MOVE: "red",
    FsmState.TRAP: "yellow",
    FsmState.DRIBBLE: "green",
    FsmState.KICK: "blue",
}


@dataclass(slots=True)
class CommandSet:
    trap_start: bool = False
    trap_end: bool = False
    kick_start: bool = False
    kick_end: bool = False


@dataclass(slots=True)
class TransitionRecord:
    tick: int
    player: int
    from_state: str
    to_state: str
    trigger: str


def _rules(state: FsmState, cmds: CommandSet, near: bool, appr: bool, collision: bool):
    """The transition rules over boolean predicates, physical rules first."""
    if state is FsmState.MOVE:
        if near and appr:
            return FsmState.DRIBBLE, "ball_in_range"
        if cmds.trap_start and appr:
            return FsmState.TRAP, "trap_start"
    elif state is FsmState.DRIBBLE:
        if not near:
            return FsmState.MOVE, "ball_out_of_range"
        if cmds.kick_start:
            return FsmState.KICK, "kick_start"
    elif state is FsmState.TRAP:
        if collision:
            return FsmState.DRIBBLE, "ball_contact"
        if cmds.trap_end:
            return FsmState.MOVE, "trap_end"
        if not appr:
            return FsmState.MOVE, "ball_receding"
    elif state is FsmState.KICK:
        if collision:
            return FsmState.MOVE, "ball_contact"
        if not near:
            return FsmState.MOVE, "ball_out_of_range"
        if cmds.kick_end:
            return FsmState.DRIBBLE, "kick_end"
    return None


def next_state(
    current: FsmState,
    cmds: CommandSet,
    world: World,
    player_id: int,
    events: list[CollisionEvent],
) -> tuple[FsmState, TransitionRecord | None]:
    """Evaluate this control tick's transition from live world state."""
    char = world.players[player_id]
    if world.ball is None:
        near, appr = False, False
    else:
        near = horizontal_distance(world.ball.pos, char.root_pos) <= DRIBBLE_RANGE
        appr = approaching(world.ball, char)
    collision = any(e.player == player_id for e in events)
    hit = _rules(current, cmds, near, appr, collision)
    if hit is None:
        return current, None
    to, trigger = hit
    return to, TransitionRecord(world.tick, player_id, current.value, to.value, trigger)


def transition_table() -> dict:
    """Exhaustive (state, trap_start, trap_end, kick_start, kick_end, near,
    approaching, collision) -> next state mapping for test comparison."""
    table = {}
    for state in FsmState:
        for ts, te, ks, ke, near, appr, col in product((False, True), repeat=7):
            cmds = CommandSet(ts, te, ks, ke)
            hit = _rules(state, cmds, near, appr, col)
            table[(state, ts, te, ks, ke, near, appr, col)] = hit[0] if hit else state
    return table


@dataclass
class PlayerFsm:
    """Per-player FSM instance with command latching."""

    state: FsmState = FsmState.MOVE
    _pending: dict = field(default_factory=dict)

    def push_commands(self, cmds: CommandSet) -> None:
        for name in ("trap_start", "trap_end", "kick_start", "kick_end"):
            if getattr(cmds, name):
                self._pending[name] = COMMAND_TTL

    def tick(
        self, world: World, player_id: int, events: list[CollisionEvent]
    ) -> TransitionRecord | None:
        latched = CommandSet(**{k: True for k in self._pending})
        new, record = next_state(self.state, latched, world, player_id, events)
        if record is not None:
            self.state = new
            # the consumed edge clears; unrelated pending commands persist
            trigger = record.trigger
            if trigger in self._pending:
                del self._pending[trigger]
        for name in list(self._pending):
            self._pending[name] -= 1
            if self._pending[name] <= 0:
                del self._pending[name]
        return record
