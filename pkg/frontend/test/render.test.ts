import { describe, expect, it } from "vitest";

import { FSM_COLORS, FrameMessage, parseServerMessage } from "../src/protocol.js";
import { buildDrawModel } from "../src/render.js";

function frame(overrides: Partial<FrameMessage> = {}): FrameMessage {
  return {
    type: "frame",
    tick: 42,
    players: [
      {
        id: 0, team: 0, pos: [1, 2, 0.9], facing: [1, 0], fsm: "dribble",
        color: "green", controlled: true,
        goal: { skill: "dribble", velocity: [3, 0] },
      },
      {
        id: 1, team: 1, pos: [-4, 0, 0.9], facing: [0, 1], fsm: "trap",
        color: "yellow", controlled: false, goal: null,
      },
    ],
    ball: { pos: [0, 0, 1.5], vel: [1, 0, -2], radius: 0.11 },
    transitions: [],
    events: [],
    ...overrides,
  };
}

describe("render model", () => {
  it("fsm color dot equals the frame state's color", () => {
    const model = buildDrawModel(frame());
    expect(model.players[0].color).toBe("green");
    expect(model.players[1].color).toBe("yellow");
    for (const [state, color] of Object.entries(FSM_COLORS)) {
      const f = frame();
      f.players[0].fsm = state as any;
      expect(buildDrawModel(f).players[0].color).toBe(color);
    }
  });

  it("color scheme is red/yellow/green/blue for move/trap/dribble/kick", () => {
    expect(FSM_COLORS.move).toBe("red");
    expect(FSM_COLORS.trap).toBe("yellow");
    expect(FSM_COLORS.dribble).toBe("green");
    expect(FSM_COLORS.kick).toBe("blue");
  });

  it("derives everything from the frame, ball height included", () => {
    const model = buildDrawModel(frame());
    expect(model.ball).not.toBeNull();
    expect(model.ball!.height).toBeCloseTo(1.5);
    expect(model.tick).toBe(42);
  });

  it("controlled player gets goal markers", () => {
    const model = buildDrawModel(frame());
    const dots = model.markers.filter((m) => m.kind === "velocity-dot");
    expect(dots.length).toBeGreaterThan(0);
  });

  it("handles a ball-less frame", () => {
    const model = buildDrawModel(frame({ ball: null }));
    expect(model.ball).toBeNull();
  });
});

describe("defensive parsing", () => {
  it("accepts a valid frame", () => {
    const msg = parseServerMessage(JSON.stringify(frame()));
    expect(msg?.type).toBe("frame");
  });

  it("drops malformed json without throwing", () => {
    expect(parseServerMessage("{nope")).toBeNull();
    expect(parseServerMessage("42")).toBeNull();
    expect(parseServerMessage('{"type":"frame"}')).toBeNull();
  });

  it("drops frames with bad vectors or unknown states", () => {
    const bad = frame();
    (bad.players[0] as any).pos = [1, "x", 3];
    expect(parseServerMessage(JSON.stringify(bad))).toBeNull();
    const bad2 = frame();
    (bad2.players[0] as any).fsm = "fly";
    expect(parseServerMessage(JSON.stringify(bad2))).toBeNull();
  });

  it("accepts hello messages", () => {
    const msg = parseServerMessage(
      JSON.stringify({ type: "hello", scenario: "match", players: 6, control_hz: 30 })
    );
    expect(msg?.type).toBe("hello");
  });
});
