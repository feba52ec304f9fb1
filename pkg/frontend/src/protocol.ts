/**
 * Wire types shared with the session server, plus defensive frame parsing.
 * The client holds no authoritative state: everything rendered comes from
 * server frames.
 */

export type FsmStateName = "move" | "trap" | "dribble" | "kick";
export type FsmColor = "red" | "yellow" | "green" | "blue";

export const FSM_COLORS: Record<FsmStateName, FsmColor> = {
  move: "red",
  trap: "yellow",
  dribble: "green",
  kick: "blue",
};

export interface PlayerView {
  id: number;
  team: number;
  pos: [number, number, number];
  facing: [number, number];
  fsm: FsmStateName;
  color: FsmColor;
  controlled: boolean;
  goal: Record<string, unknown> | null;
}

export interface BallView {
  pos: [number, number, number];
  vel: [number, number, number];
  radius: number;
}

export interface TransitionView {
  tick: number;
  player: number;
  from: string;
  to: string;
  trigger: string;
}

export interface FrameMessage {
  type: "frame";
  tick: number;
  players: PlayerView[];
  ball: BallView | null;
  transitions: TransitionView[];
  events: { player: number; part: string }[];
}

export interface HelloMessage {
  type: "hello";
  scenario: string;
  players: number;
  control_hz: number;
}

export type ServerMessage = FrameMessage | HelloMessage;

export interface InputMessage {
  type: "input";
  move: [number, number];
  face: [number, number];
  lt: number;
  rt: number;
  buttons: {
    trap_start?: boolean;
    trap_end?: boolean;
    kick_start?: boolean;
    kick_end?: boolean;
  };
  switch: number;
}

function isVec(v: unknown, n: number): v is number[] {
  return Array.isArray(v) && v.length >= n && v.slice(0, n).every((x) => typeof x === "number" && isFinite(x));
}

/** Parse a server message; returns null (never throws) on malformed input. */
export function parseServerMessage(raw: string): ServerMessage | null {
  let obj: any;
  try {
    obj = JSON.parse(raw);
  } catch {
    return null;
  }
  if (!obj || typeof obj !== "object") return null;
  if (obj.type === "hello") {
    if (typeof obj.scenario !== "string" || typeof obj.players !== "number") return null;
    return obj as HelloMessage;
  }
  if (obj.type !== "frame") return null;
  if (typeof obj.tick !== "number" || !Array.isArray(obj.players)) return null;
  for (const p of obj.players) {
    if (!isVec(p.pos, 3) || !isVec(p.facing, 2)) return null;
    if (!(p.fsm in FSM_COLORS)) return null;
  }
  if (obj.ball !== null && obj.ball !== undefined && !isVec(obj.ball.pos, 3)) return null;
  obj.transitions = Array.isArray(obj.transitions) ? obj.transitions : [];
  obj.events = Array.isArray(obj.events) ? obj.events : [];
  return obj as FrameMessage;
}
