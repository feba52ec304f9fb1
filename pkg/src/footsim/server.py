"""Realtime session server: one simulation loop per WebSocket session.

The client streams mapped inputs; the loop applies the latest input at the
next control tick and pushes one frame message per tick at the control rate.
Message types: input (client), frame / event / metrics (server).
"""
from __future__ import annotations

import asyncio
import json
import os

from fastapi import FastAPI, WebSocket, WebSocketDisconnect

from .fsm import STATE_COLORS, FsmState
from .scenarios import UserInput, make_scenario

DEFAULT_PORT = int(os.environ.get("FOOTSIM_PORT", "8736"))
CONTROL_DT = 1.0 / 30.0


def _parse_input(msg: dict) -> UserInput:
    buttons = msg.get("buttons", {})
    return UserInput(
        move=tuple(msg.get("move", (0.0, 0.0))),
        face=tuple(msg.get("face", (0.0, 0.0))),
        lt=float(msg.get("lt", 0.0)),
        rt=float(msg.get("rt", 0.0)),
        trap_start=bool(buttons.get("trap_start")),
        trap_end=bool(buttons.get("trap_end")),
        kick_start=bool(buttons.get("kick_start")),
        kick_end=bool(buttons.get("kick_end")),
        switch=int(msg.get("switch", 0)),
    )


def _frame_message(scenario, state, transitions_from: int) -> dict:
    world = state.world
    players = []
    for pid, slot in enumerate(state.slots):
        char = world.players[pid]
        fsm = slot.fsm.state
        players.append({
            "id": pid,
            "team": slot.team,
            "pos": [char.root_pos.x, char.root_pos.y, char.root_pos.z],
            "facing": [char.facing.x, char.facing.y],
            "fsm": fsm.value,
            "color": STATE_COLORS[fsm],
            "controlled": pid == state.controlled,
            "goal": slot.goal.to_json() if slot.goal is not None else None,
        })
    ball = None
    if world.ball is not None:
        ball = {
            "pos": list(world.ball.pos),
            "vel": list(world.ball.vel),
            "radius": world.ball.radius,
        }
    new_transitions = [
        {"tick": t.tick, "player": t.player, "from": t.from_state, "to": t.to_state,
         "trigger": t.trigger}
        for t in state.transitions[transitions_from:]
    ]
    return {
        "type": "frame",
        "tick": world.tick,
        "players": players,
        "ball": ball,
        "transitions": new_transitions,
        "events": [
            {"player": e.player, "part": e.part} for e in world.events if e.player >= 0
        ],
    }


def create_app(scenario_id: str = "match", seed: int = 0, tick_interval: float = CONTROL_DT) -> FastAPI:
    app = FastAPI(title="footsim session server")
    app.state.scenario_id = scenario_id
    app.state.seed = seed
    app.state.tick_interval = tick_interval
    app.state.input_latencies = []  # (receipt sim tick, applied sim tick)

    @app.get("/health")
    def health():
        return {"ok": True, "scenario": app.state.scenario_id}

    @app.websocket("/session")
    async def session(ws: WebSocket):
        await ws.accept()
        scenario = make_scenario(app.state.scenario_id, app.state.seed, record=False)
        state = scenario.setup()
        scenario.state = state
        stop = asyncio.Event()
        pending_receipt = [None]  # sim tick when the latest unapplied input landed

        async def reader():
            try:
                while not stop.is_set():
                    text = await ws.receive_text()
                    try:
                        msg = json.loads(text)
                    except json.JSONDecodeError:
                        continue  # malformed input: drop, keep the session
                    if msg.get("type") == "input":
                        scenario.user_input = _parse_input(msg)
                        pending_receipt[0] = state.world.tick
            except WebSocketDisconnect:
                stop.set()
            except Exception:
                stop.set()

        reader_task = asyncio.create_task(reader())
        sent_transitions = 0
        try:
            await ws.send_text(json.dumps({
                "type": "hello",
                "scenario": app.state.scenario_id,
                "players": len(state.slots),
                "control_hz": 30,
            }))
            while not stop.is_set() and state.world.tick < state.tick_limit:
                scenario.tick(state)
                if pending_receipt[0] is not None:
                    app.state.input_latencies.append((pending_receipt[0], state.world.tick))
                    pending_receipt[0] = None
                # consumed edges must not re-fire next tick
                if scenario.user_input is not None:
                    scenario.user_input = UserInput(
                        move=scenario.user_input.move,
                        face=scenario.user_input.face,
                        lt=scenario.user_input.lt,
                        rt=scenario.user_input.rt,
                    )
                msg = _frame_message(scenario, state, sent_transitions)
                sent_transitions = len(state.transitions)
                await ws.send_text(json.dumps(msg))
                if state.world.tick % 60 == 0 and state.world.ball is not None:
                    me = state.world.players[state.controlled]
                    b = state.world.ball
                    import math as _m

                    await ws.send_text(json.dumps({
                        "type": "metrics",
                        "tick": state.world.tick,
                        "ball_distance": _m.hypot(b.pos.x - me.root_pos.x,
                                                  b.pos.y - me.root_pos.y),
                        "ball_speed": _m.hypot(b.vel.x, b.vel.y),
                        "transitions": len(state.transitions),
                    }))
                if app.state.tick_interval > 0:
                    await asyncio.sleep(app.state.tick_interval)
                else:
                    await asyncio.sleep(0)
        except (WebSocketDisconnect, RuntimeError):
            pass
        finally:
            stop.set()
            reader_task.cancel()

    return app


def serve(scenario_id: str, port: int, seed: int = 0) -> None:
    import uvicorn

    app = create_app(scenario_id, seed)
    uvicorn.run(app, host="127.0.0.1", port=port, log_level="warning")
